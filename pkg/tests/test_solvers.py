import json

import numpy as np
import pytest

from rppa_lab.certify import (
    crossterm_identity_checks,
    double_decrease_slacks,
    step_optimality_slacks,
    successive_value_slacks,
)
from rppa_lab.prox_library import Huber, L1Norm, Quadratic, ScaledNorm, catalog
from rppa_lab.schedules import constant, explicit, left_silver, right_silver, silver, silver_constants, tv_schedule
from rppa_lab.solvers import (
    NumericalFailure,
    gd_measures,
    measures,
    rppa_gd_equivalence,
    run_gd,
    run_rppa,
    write_trace_jsonl,
)
from tests.conftest import e1


def test_unrelaxed_quadratic_contracts_geometrically():
    inst = Quadratic(q=[1.0, 1.0], b=[0.0, 0.0])
    trace = run_rppa(inst, 1.0, constant(1.0, 3), e1())
    for k in range(4):
        np.testing.assert_allclose(trace.xs[k], e1() / 2**k, rtol=1e-14)
    np.testing.assert_allclose(trace.zs[3], e1() / 16.0, rtol=1e-14)


def test_trace_shapes_and_relaxation_identity():
    inst = L1Norm(w=0.7)
    sched = tv_schedule(9)
    trace = run_rppa(inst, 0.8, sched, np.array([1.3, -0.4]))
    assert trace.xs.shape == (10, 2)
    assert trace.zs.shape == (10, 2)
    assert trace.fvals.shape == (10,)
    for k, a in enumerate(sched.steps):
        recomputed = trace.xs[k] + a * (trace.zs[k] - trace.xs[k])
        scale = np.maximum(1.0, np.maximum(np.abs(trace.xs[k]), np.abs(trace.xs[k + 1])))
        assert np.all(np.abs(recomputed - trace.xs[k + 1]) <= 1e-13 * scale)


def test_worst_instance_iterates_stay_on_the_ray():
    sched = silver(3)
    lam = 1.0
    eta = 1.0 / (lam * (1.0 + sched.total))
    inst = ScaledNorm(eta=eta)
    trace = run_rppa(inst, lam, sched, e1())
    assert np.all(trace.xs[:, 1] == 0.0)
    assert np.all(trace.xs[:, 0] > 0.0)
    np.testing.assert_allclose(trace.zs[-1] - trace.xs[-1], -lam * eta * e1(), atol=1e-14)


def test_single_step_run_outputs_final_prox():
    inst = ScaledNorm(eta=0.3)
    sched = explicit([silver_constants(0).gamma_m])
    trace = run_rppa(inst, 1.0, sched, e1())
    assert trace.xs.shape == (2, 2)
    np.testing.assert_allclose(trace.zs[1], inst.prox(trace.xs[1], 1.0), atol=1e-15)


def test_empty_schedule_is_rejected():
    with pytest.raises(ValueError):
        explicit([])


def test_gd_quadratic_reaches_minimizer_in_one_step():
    inst = Quadratic(q=[1.0, 1.0], b=[0.0, 0.0])
    trace = run_gd(inst, constant(1.0, 2), e1())
    np.testing.assert_allclose(trace.xs[1], np.zeros(2), atol=1e-15)
    np.testing.assert_allclose(trace.xs[2], np.zeros(2), atol=1e-15)


def test_gd_huber_linear_branch_run():
    L = 1.0
    sched = silver(2)
    eta = L / (2.0 * sched.total + 1.0)
    inst = Huber(eta=eta, L=L)
    trace = run_gd(inst, sched, e1())
    norms = np.linalg.norm(trace.xs, axis=1)
    assert np.all(norms >= inst.radius * (1.0 - 1e-12))
    expected = (1.0 - sched.total * eta / L) * e1()
    np.testing.assert_allclose(trace.xs[-1], expected, rtol=1e-12)


def test_gd_explicit_single_damped_step():
    inst = Quadratic(q=[2.0, 1.0], b=[0.0, 0.0])
    trace = run_gd(inst, explicit([0.1]), e1())
    np.testing.assert_allclose(trace.xs[1], e1() * (1.0 - 0.1 * 2.0 / 2.0), rtol=1e-14)


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.kind)
def test_rppa_equals_gd_on_envelope(inst):
    assert rppa_gd_equivalence(inst, 1.0, silver(2), e1(inst.dim)) <= 1e-11


def test_rppa_gd_equivalence_exact_for_quadratic():
    inst = Quadratic(q=[1.0, 1.0], b=[0.0, 0.0])
    assert rppa_gd_equivalence(inst, 1.0, constant(1.0, 6), e1()) == 0.0


def test_rppa_gd_equivalence_tv_l1():
    assert rppa_gd_equivalence(L1Norm(w=0.7), 1.0, tv_schedule(50), np.array([2.0, -1.0])) <= 1e-10


def test_measures_zero_at_minimizer():
    inst = L1Norm(w=0.7)
    rep = measures(run_rppa(inst, 1.0, constant(1.0, 4), inst.x_star), inst)
    assert rep.fval_residual == 0.0
    assert rep.subgrad_norm == 0.0
    assert rep.init_dist_sq == 0.0
    assert rep.init_fval_gap == 0.0


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
def test_measures_match_lower_bound_constructions(lam):
    sched = tv_schedule(6)
    denom = 1.0 + sched.total

    inst = ScaledNorm(eta=1.0 / (2.0 * lam * denom))
    rep = measures(run_rppa(inst, lam, sched, e1()), inst)
    assert rep.fval_residual / rep.init_dist_sq == pytest.approx(1.0 / (4.0 * lam * denom), rel=1e-12)

    inst = ScaledNorm(eta=1.0 / (lam * denom))
    rep = measures(run_rppa(inst, lam, sched, e1()), inst)
    assert rep.subgrad_norm**2 / rep.init_fval_gap == pytest.approx(1.0 / (lam * denom), rel=1e-12)


def test_composite_combines_value_and_gradient():
    inst = ScaledNorm(eta=0.4)
    lam = 0.7
    rep = measures(run_rppa(inst, lam, constant(1.0, 3), e1()), inst)
    assert rep.composite == pytest.approx(rep.fval_residual + 0.5 * lam * rep.subgrad_norm**2)


def test_gd_measures_has_no_composite():
    inst = Quadratic(q=[1.0, 2.0], b=[0.0, 0.0])
    rep = gd_measures(run_gd(inst, constant(1.0, 3), e1()), inst)
    assert rep.composite is None
    assert rep.fval_residual >= 0.0


def test_measures_reject_lying_f_star():
    trace = run_rppa(ScaledNorm(eta=1.0), 1.0, constant(1.0, 3), e1())

    class Lying:
        kind = "scaled_norm"
        dim = 2
        x_star = np.zeros(2)
        f_star = 5.0  # impossible optimum for eta*||x||

        def value(self, x):
            return float(np.linalg.norm(x))

    with pytest.raises(ValueError):
        measures(trace, Lying())


def test_measure_report_mismatched_trace_kind():
    inst = Quadratic(q=[1.0, 2.0], b=[0.0, 0.0])
    gd_trace = run_gd(inst, constant(1.0, 2), e1())
    with pytest.raises(ValueError):
        measures(gd_trace, inst)
    rppa_trace = run_rppa(inst, 1.0, constant(1.0, 2), e1())
    with pytest.raises(ValueError):
        gd_measures(rppa_trace, inst)


def test_nonfinite_iterate_reports_step(recwarn):
    inst = Quadratic(q=[1.0, 1.0], b=[0.0, 0.0])
    with pytest.raises(NumericalFailure) as err:
        run_rppa(inst, 1.0, constant(100.0, 400), e1())
    assert 0 < err.value.step < 400
    assert not [w for w in recwarn if issubclass(w.category, RuntimeWarning)]


def test_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        run_rppa(ScaledNorm(eta=1.0), -1.0, constant(1.0, 2), e1())


def test_trace_jsonl_export(tmp_path):
    inst = ScaledNorm(eta=1.0)
    trace = run_rppa(inst, 1.0, constant(1.0, 3), e1())
    path = tmp_path / "trace.jsonl"
    write_trace_jsonl(trace, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 4
    rec = json.loads(lines[0])
    assert set(rec) == {"k", "x", "z", "f_z", "grad_norm"}
    assert rec["k"] == 0
    assert rec["x"] == [1.0, 0.0]


# --- trace inequality suites --------------------------------------------------

LAMBDAS = (0.5, 1.0, 2.0)
SCHEDULES = [
    constant(0.25, 12), constant(1.0, 12), constant(1.41, 12),
    tv_schedule(12), silver(3), right_silver(2), left_silver(2),
]


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.kind)
def test_step_optimality_holds_for_any_schedule(inst, rng):
    for sched in SCHEDULES:
        for lam in LAMBDAS:
            trace = run_rppa(inst, lam, sched, rng.normal(size=inst.dim) * 1.5)
            assert float(step_optimality_slacks(trace, inst).min()) >= -1e-11


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.kind)
def test_successive_value_inequality(inst, rng):
    for sched in SCHEDULES:
        for lam in LAMBDAS:
            trace = run_rppa(inst, lam, sched, rng.normal(size=inst.dim) * 1.5)
            assert float(successive_value_slacks(trace, inst).min()) >= -1e-11


@pytest.mark.parametrize("inst", catalog(), ids=lambda i: i.kind)
def test_crossterm_identity_and_sign(inst, rng):
    for sched in SCHEDULES:
        trace = run_rppa(inst, 1.0, sched, rng.normal(size=inst.dim) * 1.5)
        gaps, inners = crossterm_identity_checks(trace)
        if gaps.size:
            assert float(np.abs(gaps).max()) <= 1e-11
            assert float(inners.min()) >= -1e-11


ALPHA_GRID = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]


@pytest.mark.parametrize("alpha", ALPHA_GRID)
def test_grad_norm_monotone_constant_schedule(alpha, rng):
    for inst in catalog():
        trace = run_rppa(inst, 1.0, constant(alpha, 15), rng.normal(size=inst.dim) * 1.5)
        diffs = np.diff(trace.grad_norms)
        assert float(diffs.max(initial=0.0)) <= 1e-12 * max(1.0, float(trace.grad_norms[0]))


@pytest.mark.parametrize("alpha", [a for a in ALPHA_GRID if a < 2.0])
def test_double_decrease_constant_schedule(alpha, rng):
    for inst in catalog():
        trace = run_rppa(inst, 1.0, constant(alpha, 15), rng.normal(size=inst.dim) * 1.5)
        assert float(double_decrease_slacks(trace, inst).min()) >= -1e-11


def test_double_decrease_requires_constant_schedule():
    inst = ScaledNorm(eta=1.0)
    trace = run_rppa(inst, 1.0, tv_schedule(4), e1())
    with pytest.raises(ValueError):
        double_decrease_slacks(trace, inst)


def test_gd_interior_values_may_rise_under_long_steps():
    # long silver steps are not monotone in h; only the endpoint obeys the bound
    inst = Huber(eta=0.6, L=1.0)
    trace = run_gd(inst, silver(3), e1())
    diffs = np.diff(trace.fvals)
    assert trace.fvals[-1] <= trace.fvals[0]
    assert bool(np.any(diffs > 0))
