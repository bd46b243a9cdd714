"""Command-line front end.

Subcommands:

* ``schedule`` -- print a schedule's steps (6 decimals) plus totals;
* ``run``      -- execute one relaxed-proximal or gradient-descent run and
                  report its endpoint measures;
* ``certify``  -- run a named invariant suite, one summary line per check;
* ``sweep``    -- validate every proved upper bound across the catalog;
* ``table``    -- regenerate the bound tables as CSV, optionally with
                  figures rendered next to the delimited output.

Exit codes: 0 success, 1 certification violation, 2 usage error,
3 runtime numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rppa_lab import bounds, certify, core_math, prox_library, schedules, solvers
from rppa_lab.bounds import Measure

WORST_MEASURES = {
    "gdnorm": Measure.SUBGRAD_OVER_DIST,
    "fval": Measure.FVAL_OVER_DIST_SQ,
    "gdsq": Measure.SUBGRAD_SQ_OVER_FVAL,
}

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


# ---------------------------------------------------------------------------
# shared parsing helpers

def _default_seed() -> int:
    env = os.environ.get("RPPA_LAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"RPPA_LAB_SEED must be an integer, got {env!r}")
    return 0


def _parse_schedule(spec: list[str]) -> schedules.Schedule:
    if not spec:
        raise ValueError("schedule spec is empty")
    kind, args = spec[0], spec[1:]
    if kind == "constant":
        if len(args) != 2:
            raise ValueError("constant schedule needs ALPHA and N")
        return schedules.constant(float(args[0]), int(args[1]))
    if kind == "tv":
        if len(args) != 1:
            raise ValueError("tv schedule needs N")
        return schedules.tv_schedule(int(args[0]))
    if kind in ("silver", "right_silver", "left_silver"):
        if len(args) != 1:
            raise ValueError(f"{kind} schedule needs M")
        return getattr(schedules, kind)(int(args[0]))
    if kind == "explicit":
        if not args:
            raise ValueError("explicit schedule needs at least one step")
        return schedules.explicit([float(a) for a in args])
    raise ValueError(f"unknown schedule kind {kind!r}")


def _parse_params(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"parameter {pair!r} is not of the form key=value")
        key, raw = pair.split("=", 1)
        vals = raw.split(",")
        if len(vals) == 1:
            out[key] = int(raw) if key == "dim" else float(raw)
        else:
            out[key] = [float(v) for v in vals]
    return out


def _build_instance(name: str, params: dict) -> prox_library.ProxFunction:
    if name.endswith(".json"):
        with open(name) as fh:
            return prox_library.from_json(json.load(fh))
    defaults = {inst.kind: inst for inst in prox_library.catalog()}
    if name not in defaults:
        raise ValueError(f"unknown instance {name!r}; catalog: {sorted(defaults)}")
    if not params:
        return defaults[name]
    base = defaults[name].to_json()
    base["params"].update({k: v for k, v in params.items() if k != "dim"})
    if "dim" in params:
        base["dimension"] = int(params["dim"])
    return prox_library.from_json(base)


def _parse_x0(spec: str, dim: int) -> np.ndarray:
    if spec == "e1":
        x0 = np.zeros(dim)
        x0[0] = 1.0
        return x0
    return np.array([float(v) for v in spec.split(",")])


def _emit(text: str, out_path: str | None):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# schedule command

def cmd_schedule(args) -> int:
    sched = _parse_schedule([args.kind] + args.params)
    if args.format == "json":
        _emit(json.dumps(sched.to_json()) + "\n", args.out)
        return EXIT_OK
    lines = schedules.format_steps(sched)
    footer = [f"total = {sched.total:.6f}"]
    if sched.kind in ("silver", "right_silver", "left_silver"):
        consts = schedules.silver_constants(sched.params["m"])
        footer.append(f"T_m = {consts.t_m:.6f}")
    else:
        footer.append(f"A_{{N-1}} = {sched.total:.6f}")
    _emit("\n".join(lines + footer) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# run command

def _json_safe(v):
    # bare Infinity/NaN is not valid JSON; encode nonfinite floats as strings
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _ratio_lines(rep: solvers.MeasureReport) -> list[tuple[str, float]]:
    rows = [
        ("fval_residual", rep.fval_residual),
        ("subgrad_norm", rep.subgrad_norm),
    ]
    if rep.composite is not None:
        rows.append(("composite", rep.composite))
    rows += [
        ("init_dist_sq", rep.init_dist_sq),
        ("init_fval_gap", rep.init_fval_gap),
    ]
    if rep.init_dist_sq > 0:
        rows.append(("fval_residual/init_dist_sq", rep.fval_residual / rep.init_dist_sq))
        rows.append(("subgrad_norm/init_dist", rep.subgrad_norm / math.sqrt(rep.init_dist_sq)))
    if math.isfinite(rep.init_fval_gap) and rep.init_fval_gap > 0:
        rows.append(("subgrad_norm_sq/init_fval_gap", rep.subgrad_norm**2 / rep.init_fval_gap))
    return rows


def cmd_run(args) -> int:
    sched = _parse_schedule(args.schedule)
    lam = args.lam
    if args.method == "rppa":
        if args.worst:
            inst, x0 = certify.worst_instance(sched, lam, WORST_MEASURES[args.worst])
        else:
            inst = _build_instance(args.instance, _parse_params(args.param))
            x0 = _parse_x0(args.x0, inst.dim)
        trace = solvers.run_rppa(inst, lam, sched, x0)
        rep = solvers.measures(trace, inst)
    else:
        if args.worst:
            if sched.kind != "silver":
                raise ValueError("gradient-descent worst instances require a silver schedule")
            inst, x0 = certify.worst_instance_gd_huber(
                sched.params["m"], args.lipschitz, WORST_MEASURES[args.worst])
        else:
            inst = _build_instance(args.instance, _parse_params(args.param))
            if not isinstance(inst, prox_library.SmoothFunction):
                raise ValueError(f"instance {inst.kind} has no gradient; use --method rppa")
            x0 = _parse_x0(args.x0, inst.dim)
        trace = solvers.run_gd(inst, sched, x0)
        rep = solvers.gd_measures(trace, inst)

    if args.trace:
        solvers.write_trace_jsonl(trace, args.trace)
    rows = _ratio_lines(rep)
    if args.format == "json":
        _emit(json.dumps({k: _json_safe(v) for k, v in rows}) + "\n", args.out)
    elif args.format == "csv":
        _emit(solvers.report_csv(rep), args.out)
    else:
        _emit("".join(f"{k} = {v:.6f}\n" for k, v in rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# certify command

@dataclass
class CheckOutcome:
    check_id: str
    passed: bool
    worst: float
    detail: str = ""


def _identity_checks(rng: np.random.Generator) -> list[CheckOutcome]:
    out = []
    worst = 0.0
    for _ in range(1000):
        x, y, z, w = (rng.normal(size=10) for _ in range(4))
        worst = max(worst, core_math.three_point_identity(x, y, z, w).rel_gap)
    out.append(CheckOutcome("identities/three_point", worst <= 1e-12, worst))

    worst = 0.0
    for _ in range(1000):
        x, y = rng.normal(size=6), rng.normal(size=6)
        theta = rng.uniform(-2.0, 3.0)
        worst = max(worst, core_math.convex_combination_identity(x, y, theta).rel_gap)
    out.append(CheckOutcome("identities/convex_combination", worst <= 1e-12, worst))

    bad = 0
    for _ in range(1000):
        x, y = rng.normal(size=5), rng.normal(size=5)
        kappa = float(np.exp(rng.uniform(-3, 3)))
        ok_up, ok_lo = core_math.young_bounds(x, y, kappa)
        bad += (not ok_up) + (not ok_lo)
    out.append(CheckOutcome("identities/young", bad == 0, float(bad)))

    violated = core_math.tv_implication_violations(rng, n=10_000)
    out.append(CheckOutcome("identities/tv_implication", violated == 0, float(violated)))

    worst1 = worst2 = 0.0
    for _ in range(1000):
        a, b, c, d = (rng.normal(size=5) for _ in range(4))
        r, s = (float(np.exp(rng.uniform(-1.5, 1.5))) for _ in range(2))
        worst1 = max(worst1, core_math.simplify_identity_1(a, b, c, d, r, s).rel_gap)
        worst2 = max(worst2, core_math.simplify_identity_2(b, c, d, r, s).rel_gap)
    out.append(CheckOutcome("identities/simplify_1", worst1 <= 1e-11, worst1))
    out.append(CheckOutcome("identities/simplify_2", worst2 <= 1e-11, worst2))

    worst = 0.0
    for inst in prox_library.catalog():
        for _ in range(50):
            x = rng.normal(size=inst.dim) * 2.0
            lam = float(np.exp(rng.uniform(-1.5, 1.5)))
            env = inst.moreau_value(x, lam)
            z = inst.prox(x, lam)
            g = inst.moreau_grad(x, lam)
            other = inst.value(z) + 0.5 * lam * core_math.sqnorm(g)
            worst = max(worst, core_math.rel_gap(env, other))
    out.append(CheckOutcome("identities/envelope_identity", worst <= 1e-11, worst))

    bad = 0.0
    for inst in prox_library.catalog():
        for _ in range(50):
            x, y = rng.normal(size=inst.dim) * 2, rng.normal(size=inst.dim) * 2
            lam = float(np.exp(rng.uniform(-1.5, 1.5)))
            zx, zy = inst.prox(x, lam), inst.prox(y, lam)
            slack = float(np.linalg.norm(x - y)) - float(np.linalg.norm(zx - zy))
            bad = min(bad, slack)
    out.append(CheckOutcome("identities/prox_nonexpansive", bad >= -1e-12, -bad))

    lemma_checks = _lemma_checks(rng)
    out.extend(lemma_checks)
    return out


def _lemma_checks(rng: np.random.Generator) -> list[CheckOutcome]:
    out = []
    scheds = [
        schedules.constant(0.25, 12), schedules.constant(1.0, 12),
        schedules.constant(1.41, 12), schedules.tv_schedule(12),
        schedules.silver(3), schedules.right_silver(2), schedules.left_silver(2),
    ]
    worst_opt = worst_succ = worst_cross_gap = worst_cross_ip = 0.0
    for inst in prox_library.catalog():
        for sched in scheds:
            x0 = rng.normal(size=inst.dim) * 1.5
            trace = solvers.run_rppa(inst, 1.0, sched, x0)
            worst_opt = min(worst_opt, float(certify.step_optimality_slacks(trace, inst).min()))
            worst_succ = min(worst_succ, float(certify.successive_value_slacks(trace, inst).min()))
            gaps, inners = certify.crossterm_identity_checks(trace)
            if gaps.size:
                worst_cross_gap = max(worst_cross_gap, float(np.abs(gaps).max()))
                worst_cross_ip = min(worst_cross_ip, float(inners.min()))
    out.append(CheckOutcome("identities/lemma_step_optimality", worst_opt >= -1e-11, -worst_opt))
    out.append(CheckOutcome("identities/lemma_successive_value", worst_succ >= -1e-11, -worst_succ))
    out.append(CheckOutcome("identities/lemma_crossterm_equality", worst_cross_gap <= 1e-11, worst_cross_gap))
    out.append(CheckOutcome("identities/lemma_crossterm_sign", worst_cross_ip >= -1e-11, -worst_cross_ip))

    alphas = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    worst_mono = worst_2sd = 0.0
    for inst in prox_library.catalog():
        for a in alphas:
            x0 = rng.normal(size=inst.dim) * 1.5
            trace = solvers.run_rppa(inst, 1.0, schedules.constant(a, 15), x0)
            diffs = np.diff(trace.grad_norms)
            worst_mono = max(worst_mono, float(diffs.max(initial=0.0)))
            if a < 2.0:
                worst_2sd = min(worst_2sd, float(certify.double_decrease_slacks(trace, inst).min()))
    out.append(CheckOutcome("identities/lemma_grad_norm_monotone", worst_mono <= 1e-11, worst_mono))
    out.append(CheckOutcome("identities/lemma_double_decrease", worst_2sd >= -1e-11, -worst_2sd))
    return out


_SILVER_FIXTURES = {
    1: ["1.414214"],
    2: ["1.414214", "2.000000", "1.414214"],
    3: ["1.414214", "2.000000", "1.414214", "3.414214", "1.414214", "2.000000", "1.414214"],
}
_RIGHT_SILVER_FIXTURES = {
    0: ["1.618034"],
    1: ["1.414214", "2.132242"],
    2: ["1.414214", "2.000000", "1.414214", "2.965447"],
    3: ["1.414214", "2.000000", "1.414214", "3.414214",
        "1.414214", "2.000000", "1.414214", "4.284319"],
}


def _schedule_checks(_: np.random.Generator) -> list[CheckOutcome]:
    out = []
    fixture_ok = all(
        schedules.format_steps(schedules.silver(m)) == fix for m, fix in _SILVER_FIXTURES.items()
    ) and all(
        schedules.format_steps(schedules.right_silver(m)) == fix
        for m, fix in _RIGHT_SILVER_FIXTURES.items()
    )
    out.append(CheckOutcome("schedules/table_fixtures", fixture_ok, 0.0 if fixture_ok else 1.0))

    worst = 0.0
    for m in range(1, 13):
        expected = schedules.rho_power(m) - 1.0
        worst = max(worst, abs(schedules.silver(m).total - expected) / expected)
    out.append(CheckOutcome("schedules/silver_totals", worst <= 1e-11, worst))

    worst = 0.0
    for m in range(0, 13):
        consts = schedules.silver_constants(m)
        resid = consts.gamma_m**2 - consts.gamma_m - schedules.rho_power(m)
        worst = max(worst, abs(resid) / max(1.0, consts.gamma_m**2))
    out.append(CheckOutcome("schedules/gamma_quadratic", worst <= 1e-11, worst))

    mirror_ok = all(
        np.array_equal(schedules.left_silver(m).steps, schedules.right_silver(m).steps[::-1])
        for m in range(0, 9)
    ) and all(
        np.array_equal(schedules.right_silver(m).steps[:-1], schedules.silver(m).steps)
        for m in range(1, 9)
    )
    out.append(CheckOutcome("schedules/mirror_structure", mirror_ok, 0.0 if mirror_ok else 1.0))

    sched = schedules.tv_schedule(10_000)  # construction itself validates the step identities
    ratio = sched.total / (2.0 * 10_000)
    out.append(CheckOutcome("schedules/tv_asymptote", 0.98 <= ratio <= 1.0, ratio))

    t_ratio = schedules.silver_constants(12).t_m / schedules.rho_power(12)
    out.append(CheckOutcome("schedules/t_m_asymptote", abs(t_ratio - 1.0) <= 0.05, t_ratio))
    return out


def _tightness_checks(_: np.random.Generator) -> list[CheckOutcome]:
    out = []

    def grid_worst(reports) -> float:
        return max(r.rel_gap for r in reports)

    sqrt2 = math.sqrt(2.0)
    const_grid = [(a, n) for a in (0.25, 0.5, 1.0, 1.2, sqrt2) for n in (1, 2, 5, 10, 100)]
    for measure, label in ((Measure.FVAL_OVER_DIST_SQ, "fval"), (Measure.SUBGRAD_OVER_DIST, "subgrad")):
        worst = grid_worst(certify.tightness_report("constant", measure, p) for p in const_grid)
        out.append(CheckOutcome(f"tightness/constant_{label}", worst <= 1e-9, worst))

    worst = grid_worst(certify.tightness_report("tv", Measure.FVAL_OVER_DIST_SQ, n)
                       for n in (1, 2, 3, 5, 10, 100))
    out.append(CheckOutcome("tightness/tv_fval", worst <= 1e-9, worst))

    worst = grid_worst(certify.tightness_report("silver", Measure.SUBGRAD_OVER_DIST, m)
                       for m in range(1, 11))
    out.append(CheckOutcome("tightness/silver_subgrad", worst <= 1e-9, worst))

    worst = grid_worst(certify.tightness_report("right_silver", Measure.FVAL_OVER_DIST_SQ, m)
                       for m in range(0, 11))
    out.append(CheckOutcome("tightness/right_silver_fval", worst <= 1e-9, worst))

    worst = grid_worst(certify.tightness_report("left_silver", Measure.SUBGRAD_SQ_OVER_FVAL, m)
                       for m in range(0, 11))
    out.append(CheckOutcome("tightness/left_silver_gdsq", worst <= 1e-9, worst))

    for measure, label in ((Measure.FVAL_OVER_DIST_SQ, "fval"), (Measure.SUBGRAD_OVER_DIST, "gdnorm")):
        worst = grid_worst(certify.tightness_report("gd_silver", measure, m) for m in range(1, 11))
        out.append(CheckOutcome(f"tightness/gd_silver_{label}", worst <= 1e-9, worst))
    return out


def _certificate_checks(rng: np.random.Generator) -> list[CheckOutcome]:
    out = []
    ok = True
    for m in range(1, 11):
        mat = certify.build_certificate_matrix(m).entries
        ok = ok and mat.shape == (2**m, 2**m) and bool(np.all(mat >= 0.0))
    out.append(CheckOutcome("certificates/matrix_nonneg", ok, 0.0 if ok else 1.0))

    worst_gd = worst_rppa = worst_scaled = 0.0
    try:
        for m in range(1, 5):
            for _ in range(20):
                inst = certify.random_smooth_instance(rng)
                res = certify.gd_certificate_check(m, inst, rng.normal(size=3) * 2)
                worst_gd = max(worst_gd, res.rel_gap)
            for _ in range(20):
                inst = certify.random_prox_instance(rng)
                lam = float(np.exp(rng.uniform(-0.7, 0.7)))
                x0 = rng.normal(size=3) * 2
                res = certify.rppa_certificate_check(m, inst, lam, x0)
                worst_rppa = max(worst_rppa, res.rel_gap)
            for _ in range(5):
                inst = certify.random_prox_instance(rng)
                res = certify.scaled_certificate_check(m, inst, 1.0, rng.normal(size=3))
                worst_scaled = max(worst_scaled, res.rel_gap)
        out.append(CheckOutcome("certificates/gd_identity", worst_gd <= 1e-9, worst_gd))
        out.append(CheckOutcome("certificates/rppa_identity", worst_rppa <= 1e-9, worst_rppa))
        out.append(CheckOutcome("certificates/scaled_identity", worst_scaled <= 1e-9, worst_scaled))
    except certify.CertificationError as exc:
        out.append(CheckOutcome("certificates/identity_failure", False, math.inf, str(exc)))

    worst = 0.0
    try:
        for inst in prox_library.catalog():
            for sched in (schedules.silver(2), schedules.constant(1.0, 7), schedules.tv_schedule(7)):
                for lam in (0.5, 1.0, 2.0):
                    x0 = np.zeros(inst.dim)
                    x0[0] = 1.0
                    worst = max(worst, certify.qp_equivalence_check(inst, lam, sched, x0))
        out.append(CheckOutcome("certificates/qp_equivalence", True, worst))
    except certify.CertificationError as exc:
        out.append(CheckOutcome("certificates/qp_equivalence", False, math.inf, str(exc)))
    return out


def _sweep_checks(_: np.random.Generator) -> list[CheckOutcome]:
    violations = certify.upper_bound_sweep(
        prox_library.catalog(), certify.default_sweep_schedules(), (0.1, 1.0, 10.0))
    return [CheckOutcome("sweep/upper_bounds", not violations, float(len(violations)),
                         "; ".join(f"{v.instance_kind}/{v.schedule_kind}" for v in violations[:5]))]


SUITES = {
    "identities": _identity_checks,
    "schedules": _schedule_checks,
    "tightness": _tightness_checks,
    "certificates": _certificate_checks,
}


def run_suite(name: str, seed: int) -> list[CheckOutcome]:
    rng = np.random.default_rng(seed)
    if name == "all":
        results = []
        for key in ("identities", "schedules", "tightness", "certificates"):
            results.extend(SUITES[key](rng))
        results.extend(_sweep_checks(rng))
    else:
        results = SUITES[name](rng)
    return sorted(results, key=lambda r: r.check_id)


def cmd_certify(args) -> int:
    results = run_suite(args.suite, args.seed)
    lines = [f"# suite={args.suite} seed={args.seed}"]
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status} {res.check_id} worst={res.worst:.3e}"
        if res.detail:
            line += f" ({res.detail})"
        lines.append(line)
    n_fail = sum(not r.passed for r in results)
    lines.append(f"# {len(results) - n_fail}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if n_fail == 0 else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# sweep command

def cmd_sweep(args) -> int:
    instances = prox_library.catalog()
    scheds = certify.default_sweep_schedules()
    lam_grid = (0.1, 1.0, 10.0)
    violations = certify.upper_bound_sweep(instances, scheds, lam_grid)

    records = []
    for inst in instances:
        for sched in scheds:
            for lam in lam_grid:
                bound_map = bounds.upper_bounds_for(sched, lam)
                if not bound_map:
                    continue
                rep = solvers.measures(
                    solvers.run_rppa(inst, lam, sched, _parse_x0("e1", inst.dim)), inst)
                for measure, bound in bound_map.items():
                    num, den = certify.measure_numerator_denominator(rep, measure)
                    if not math.isfinite(den) or den <= 0:
                        continue
                    records.append({
                        "instance": inst.kind, "schedule": sched.kind, "lambda": lam,
                        "measure": measure.value, "achieved": num / den, "bound": bound,
                        "ratio": (num / den) / bound,
                    })
    header = "instance,schedule,lambda,measure,achieved,bound,ratio"
    rows = [header] + [
        f"{r['instance']},{r['schedule']},{r['lambda']!r},{r['measure']},"
        f"{r['achieved']!r},{r['bound']!r},{r['ratio']!r}"
        for r in records
    ]
    rows.append(f"# violations: {len(violations)}")
    _emit("\n".join(rows) + "\n", args.out)
    if args.figures:
        from rppa_lab import figures
        Path(args.figures).mkdir(parents=True, exist_ok=True)
        figures.save_sweep_figure(Path(args.figures) / "sweep_margins.png", records)
    if violations:
        for v in violations:
            sys.stderr.write(f"VIOLATION {v.instance_kind} {v.schedule_kind} lam={v.lam} "
                             f"{v.measure.value}: achieved {v.achieved} > bound {v.bound}\n")
        return EXIT_VIOLATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# table command

def _table1_rows(lam: float) -> list[str]:
    rows = ["schedule,measure,N,lambda,bound"]
    n_grid = list(range(1, 11)) + [100, 1000]
    for n in n_grid:
        rows.append(f"constant_1,fval_over_dist_sq,{n},{lam!r},"
                    f"{bounds.upper_constant_fval(1.0, n, lam)!r}")
    for n in n_grid:
        rows.append(f"constant_sqrt2,fval_over_dist_sq,{n},{lam!r},"
                    f"{bounds.upper_constant_fval(math.sqrt(2.0), n, lam)!r}")
    for n in n_grid:
        rows.append(f"constant_1,subgrad_over_dist,{n},{lam!r},"
                    f"{bounds.upper_constant_subgrad(1.0, n, lam)!r}")
    for n in n_grid:
        rows.append(f"tv,fval_over_dist_sq,{n},{lam!r},{bounds.upper_tv_fval(n, lam)!r}")
    for m in range(1, 11):
        rows.append(f"silver,subgrad_over_dist,{2**m - 1},{lam!r},"
                    f"{bounds.upper_silver_rppa(m, lam, Measure.SUBGRAD_OVER_DIST)!r}")
    for m in range(0, 11):
        rows.append(f"right_silver,fval_over_dist_sq,{2**m},{lam!r},"
                    f"{bounds.upper_right_silver_fval(m, lam)!r}")
    for m in range(0, 11):
        rows.append(f"left_silver,subgrad_sq_over_fval,{2**m},{lam!r},"
                    f"{bounds.upper_left_silver_subgrad_sq(m, lam)!r}")
    return rows


def _table4_data(lam: float) -> list[dict]:
    data = []
    for m in range(0, 4):
        rep = certify.tightness_report("right_silver", Measure.FVAL_OVER_DIST_SQ, m, lam)
        data.append({
            "m": m,
            "n": 2**m,
            "bound": rep.bound,
            "achieved": rep.achieved,
            "rel_gap": rep.rel_gap,
            "external": bounds.BNB_PEP_FVAL_DIST[2**m],
        })
    return data


def cmd_table(args) -> int:
    lam = args.lam
    if args.which == "table1":
        rows = _table1_rows(lam)
        figure = ("bound_decay.png", lambda p: _render_table1_figure(p, lam))
    else:
        data = _table4_data(lam)
        rows = ["m,N,measure,bound,achieved,rel_gap,external,external_source"]
        for d in data:
            rows.append(f"{d['m']},{d['n']},fval_over_dist_sq,{d['bound']:.6f},"
                        f"{d['achieved']:.6f},{d['rel_gap']:.3e},{d['external']:.6f},external")
        figure = ("right_silver_tightness.png", lambda p: _render_table4_figure(p, data))
    _emit("\n".join(rows) + "\n", args.out)
    if args.figures:
        outdir = Path(args.figures)
        outdir.mkdir(parents=True, exist_ok=True)
        figure[1](outdir / figure[0])
    return EXIT_OK


def _render_table1_figure(path, lam):
    from rppa_lab import figures
    figures.save_bound_decay_figure(path, lam)


def _render_table4_figure(path, data):
    from rppa_lab import figures
    figures.save_tightness_figure(path, data)


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rppa-lab",
        description="Relaxed proximal point runs, schedules, bounds, and certification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sched = sub.add_parser("schedule", help="print a schedule")
    p_sched.add_argument("kind", choices=["constant", "tv", "silver", "right_silver",
                                          "left_silver", "explicit"])
    p_sched.add_argument("params", nargs="+", help="kind parameters (e.g. M, or ALPHA N)")
    p_sched.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p_sched.add_argument("--out", default=None)

    p_run = sub.add_parser("run", help="run one configuration and report measures")
    p_run.add_argument("--method", choices=["rppa", "gd"], default="rppa")
    p_run.add_argument("--instance", default="scaled_norm",
                       help="catalog name or path to an instance .json file")
    p_run.add_argument("--param", action="append", default=[],
                       help="instance parameter override key=value (repeatable)")
    p_run.add_argument("--worst", choices=sorted(WORST_MEASURES), default=None,
                       help="auto-construct the worst instance for this measure")
    p_run.add_argument("--schedule", nargs="+", required=True,
                       help="schedule spec: KIND ARGS...")
    p_run.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_run.add_argument("--lipschitz", type=float, default=1.0,
                       help="L for gradient-descent worst instances")
    p_run.add_argument("--x0", default="e1", help='start point: "e1" or comma floats')
    p_run.add_argument("--trace", default=None, help="write a JSON-lines trace here")
    p_run.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p_run.add_argument("--out", default=None)

    p_cert = sub.add_parser("certify", help="run an invariant suite")
    p_cert.add_argument("suite", choices=["identities", "schedules", "tightness",
                                          "certificates", "all"])
    p_cert.add_argument("--seed", type=int, default=_default_seed())
    p_cert.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="validate upper bounds across the catalog")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--figures", default=None, help="directory for rendered figures")

    p_table = sub.add_parser("table", help="regenerate bound tables as CSV")
    p_table.add_argument("which", choices=["table1", "table4"])
    p_table.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_table.add_argument("--out", default=None)
    p_table.add_argument("--figures", default=None, help="directory for rendered figures")

    return parser


COMMANDS = {
    "schedule": cmd_schedule,
    "run": cmd_run,
    "certify": cmd_certify,
    "sweep": cmd_sweep,
    "table": cmd_table,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except solvers.NumericalFailure as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, bounds.BoundRangeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
