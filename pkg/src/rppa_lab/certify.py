"""Worst-case constructions and numeric validation of the proof machinery.

Three layers:

* worst instances (scaled norms for the relaxed proximal method, Huber for
  gradient descent) whose runs meet the tight bounds exactly;
* the multiplier-matrix identities behind the silver-schedule rates,
  checked on arbitrary instances: the matrix recursion, the combined-gap
  identity for gradient descent and its proximal counterpart, and the
  equivalence of the two interpolation-gap tables;
* trace inequalities (per-step optimality, successive decrease, the
  cross-term identity, double sufficient decrease, gradient-norm
  monotonicity) asserted along arbitrary runs.

Checks raise ``CertificationError`` when an identity fails beyond
tolerance; the sweep instead collects violations and returns them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rppa_lab.bounds import (
    GD_TIGHT_PAIRS,
    TIGHT_PAIRS,
    Measure,
    upper_bounds_for,
    upper_gd_silver,
)
from rppa_lab.core_math import IdentityResidual, scaled_tol, sqnorm
from rppa_lab.prox_library import (
    BoxIndicator,
    Huber,
    L1Norm,
    ProxFunction,
    Quadratic,
    ScaledNorm,
    SmoothFunction,
)
from rppa_lab.schedules import (
    Schedule,
    constant,
    left_silver,
    rho_power,
    right_silver,
    silver,
    silver_constants,
    tv_schedule,
)
from rppa_lab.solvers import Trace, gd_measures, measures, run_gd, run_rppa

__all__ = [
    "CertificationError",
    "CertificateMatrix",
    "TightnessReport",
    "QPTable",
    "SweepViolation",
    "worst_instance",
    "worst_instance_gd_huber",
    "run_gd_huber_worst",
    "tightness_report",
    "tightness_csv",
    "build_certificate_matrix",
    "gd_certificate_check",
    "rppa_certificate_check",
    "scaled_certificate_check",
    "qp_tables",
    "qp_equivalence_check",
    "upper_bound_sweep",
    "default_sweep_schedules",
    "schedule_for",
    "measure_numerator_denominator",
    "step_optimality_slacks",
    "successive_value_slacks",
    "crossterm_identity_checks",
    "double_decrease_slacks",
    "random_prox_instance",
    "random_smooth_instance",
]

MAX_CERT_M = 10  # matrix size 2^m; 1024^2 entries is the desk-scale cap


class CertificationError(RuntimeError):
    """A proof-machinery identity or bound failed beyond tolerance."""


# ---------------------------------------------------------------------------
# worst instances

def _unit_x0(dim: int = 2) -> np.ndarray:
    x0 = np.zeros(dim)
    x0[0] = 1.0
    return x0


def worst_instance(schedule: Schedule, lam: float, measure: Measure,
                   dim: int = 2) -> tuple[ScaledNorm, np.ndarray]:
    """Scaled-norm instance meeting the lower bound for ``measure``.

    The slope is 1/(lam (1 + total)) for the gradient-norm measures and
    1/(2 lam (1 + total)) for the value measure; x* = 0 and ||x0|| = 1.
    """
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError(f"lambda must be positive, got {lam}")
    denom = 1.0 + schedule.total
    if measure in (Measure.SUBGRAD_OVER_DIST, Measure.SUBGRAD_SQ_OVER_FVAL):
        eta = 1.0 / (lam * denom)
    elif measure == Measure.FVAL_OVER_DIST_SQ:
        eta = 1.0 / (2.0 * lam * denom)
    else:
        raise ValueError(f"no worst-case construction for measure {measure}")
    return ScaledNorm(eta=eta, dim=dim), _unit_x0(dim)


def worst_instance_gd_huber(m: int, L: float, measure: Measure,
                            dim: int = 2) -> tuple[Huber, np.ndarray]:
    """Huber instance meeting the tight gradient-descent silver bounds.

    The slope maximizing the final value over linear-branch trajectories is
    L/(2 rho^m - 1); the gradient-norm measure instead uses L/rho^m so the
    final iterate lands exactly on the branch interface.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    rm = rho_power(m)
    if measure == Measure.FVAL_OVER_DIST_SQ:
        eta = L / (2.0 * rm - 1.0)
    elif measure == Measure.SUBGRAD_OVER_DIST:
        eta = L / rm
    else:
        raise ValueError(f"no Huber construction for measure {measure}")
    return Huber(eta=eta, L=L, dim=dim), _unit_x0(dim)


def run_gd_huber_worst(m: int, L: float, measure: Measure) -> tuple[Huber, Trace]:
    """Run gradient descent on the Huber worst instance, asserting that
    every iterate stays in the linear branch (a construction invariant)."""
    inst, x0 = worst_instance_gd_huber(m, L, measure)
    trace = run_gd(inst, silver(m), x0)
    norms = np.linalg.norm(trace.xs, axis=1)
    # the final iterate sits exactly on the branch interface, so allow the
    # rounding of a 2^m-step run; a wrong slope would violate at O(1)
    floor = inst.radius * (1.0 - 1e-9)
    if np.any(norms < floor):
        k = int(np.argmax(norms < floor))
        raise CertificationError(
            f"iterate {k} left the linear branch: |x|={norms[k]} < eta/L={inst.radius}")
    return inst, trace


# ---------------------------------------------------------------------------
# tightness reports

@dataclass(frozen=True)
class TightnessReport:
    schedule_kind: str
    measure: Measure
    param: object
    lam_or_L: float
    achieved: float
    bound: float

    @property
    def rel_gap(self) -> float:
        return abs(self.achieved - self.bound) / self.bound


def tightness_csv(reports) -> str:
    """CSV rendering of tightness reports, one row per (kind, measure, param)."""
    lines = ["kind,measure,param,lambda,achieved,bound,rel_gap"]
    for rep in reports:
        param = rep.param if not isinstance(rep.param, tuple) else ":".join(map(str, rep.param))
        lines.append(f"{rep.schedule_kind},{rep.measure.value},{param},{rep.lam_or_L!r},"
                     f"{rep.achieved!r},{rep.bound!r},{rep.rel_gap!r}")
    return "\n".join(lines) + "\n"


def schedule_for(kind: str, param) -> Schedule:
    """Build a schedule from (kind, param); constant takes (alpha, n)."""
    if kind == "constant":
        alpha, n = param
        return constant(alpha, n)
    if kind == "tv":
        return tv_schedule(param)
    if kind == "silver":
        return silver(param)
    if kind == "right_silver":
        return right_silver(param)
    if kind == "left_silver":
        return left_silver(param)
    raise ValueError(f"unknown schedule kind {kind!r}")


def measure_numerator_denominator(rep, measure: Measure) -> tuple[float, float]:
    """Split a measure into (achieved numerator, initial-state denominator)."""
    if measure == Measure.FVAL_OVER_DIST_SQ:
        return rep.fval_residual, rep.init_dist_sq
    if measure == Measure.SUBGRAD_OVER_DIST:
        return rep.subgrad_norm, math.sqrt(rep.init_dist_sq)
    if measure == Measure.SUBGRAD_SQ_OVER_FVAL:
        return rep.subgrad_norm**2, rep.init_fval_gap
    if measure == Measure.COMPOSITE_OVER_DIST_SQ:
        return rep.composite, rep.init_dist_sq
    raise ValueError(f"unknown measure {measure}")


def tightness_report(kind: str, measure: Measure, param, lam_or_L: float = 1.0) -> TightnessReport:
    """Build the worst instance for a tight (kind, measure) pair, run the
    matching method, and compare the achieved ratio with the bound."""
    if (kind, measure) in GD_TIGHT_PAIRS:
        inst, trace = run_gd_huber_worst(param, lam_or_L, measure)
        rep = gd_measures(trace, inst)
        bound = upper_gd_silver(param, lam_or_L, measure)
    elif (kind, measure) in TIGHT_PAIRS:
        sched = schedule_for(kind, param)
        inst, x0 = worst_instance(sched, lam_or_L, measure)
        trace = run_rppa(inst, lam_or_L, sched, x0)
        rep = measures(trace, inst)
        bound = upper_bounds_for(sched, lam_or_L)[measure]
    else:
        raise ValueError(f"({kind}, {measure.value}) is not a tight pair")
    num, den = measure_numerator_denominator(rep, measure)
    achieved = num / den
    report = TightnessReport(kind, measure, param, lam_or_L, achieved, bound)
    if report.achieved > report.bound * (1.0 + 1e-9):
        raise CertificationError(f"achieved {achieved} exceeds bound {bound} for {kind}/{measure.value}")
    return report


# ---------------------------------------------------------------------------
# certificate matrices and identities

@dataclass(frozen=True)
class CertificateMatrix:
    """Nonnegative multiplier matrix of size 2^m built by block doubling."""

    m: int
    entries: np.ndarray


def build_certificate_matrix(m: int) -> CertificateMatrix:
    """Doubling recursion: start from [[0, rho], [1, 0]]; each level embeds
    the previous matrix and rho^2 times it on the diagonal, then adds
    border rows carrying rho * (silver steps), rho, and rho^i."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > MAX_CERT_M:
        raise ValueError(f"m={m} exceeds cap {MAX_CERT_M}")
    rho = silver_constants(0).rho
    mat = np.array([[0.0, rho], [1.0, 0.0]])
    for i in range(1, m):
        n = 2**i
        pi = silver(i).steps
        nxt = np.zeros((2 * n, 2 * n))
        nxt[:n, :n] = mat
        nxt[n:, n:] = rho * rho * mat
        nxt[n - 1, n:2 * n - 1] += rho * pi
        nxt[n - 1, 2 * n - 1] += rho
        nxt[2 * n - 1, n - 1] += rho_power(i)
        nxt[2 * n - 1, n:2 * n - 1] += rho * pi
        mat = nxt
    mat.flags.writeable = False
    return CertificateMatrix(m=int(m), entries=mat)


def _interp_gap_table(values: np.ndarray, points: np.ndarray, grads: np.ndarray,
                      curvature: float | None) -> np.ndarray:
    """G[i, j] = v_i - v_j - <g_j, p_i - p_j> (- ||g_i - g_j||^2 / (2 curvature))."""
    pg = points @ grads.T
    gap = values[:, None] - values[None, :] - (pg - np.diag(pg)[None, :])
    if curvature is not None:
        gg = np.einsum("ij,ij->i", grads, grads)
        gap -= (gg[:, None] + gg[None, :] - 2.0 * grads @ grads.T) / (2.0 * curvature)
    return gap


def _assert_certificate(lhs: float, rhs: float, rel_tol: float, label: str) -> IdentityResidual:
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise CertificationError(f"{label}: nonfinite side, lhs={lhs}, rhs={rhs}")
    res = IdentityResidual(lhs, rhs)
    if res.rel_gap > rel_tol:
        raise CertificationError(f"{label}: sides differ, lhs={lhs}, rhs={rhs}, rel={res.rel_gap}")
    if lhs < -scaled_tol(lhs, rhs, base=1e-9):
        raise CertificationError(f"{label}: combination is negative, lhs={lhs}")
    return res


def gd_certificate_check(m: int, instance: SmoothFunction, x0,
                         rel_tol: float = 1e-9) -> IdentityResidual:
    """Check the combined-gap identity for gradient descent under silver(m):
    the multiplier-weighted sum of interpolation gaps equals a closed-form
    expression in the trace, and is nonnegative."""
    sched = silver(m)
    trace = run_gd(instance, sched, x0)
    L = instance.lipschitz_L
    xs = trace.xs
    n = xs.shape[0]  # 2^m
    grads = np.array([instance.grad(xs[k]) for k in range(n)])
    vals = trace.fvals
    gap = _interp_gap_table(vals, xs, grads, curvature=L)
    mat = build_certificate_matrix(m).entries
    lhs = float((mat * gap).sum())
    gg = np.einsum("ij,ij->i", grads, grads)
    alphas = sched.steps
    last = n - 1
    rhs = -sum(
        alphas[i] * (vals[last] - vals[i] - gg[i] / (2.0 * L)
                     - float(np.dot(grads[i], xs[0] - xs[i])))
        for i in range(last)
    )
    rm = rho_power(m)
    rhs -= 0.5 * L * sqnorm(xs[last] - xs[0]) + rm * (rm - 1.0) / (2.0 * L) * gg[last]
    return _assert_certificate(lhs, rhs, rel_tol, f"gd certificate m={m}")


def _rppa_certificate_sides(m: int, instance: ProxFunction, lam: float, x0):
    sched = silver(m)
    trace = run_rppa(instance, lam, sched, x0)
    zs = trace.zs
    grads = trace.envelope_grads()
    vals = trace.fvals
    gap = _interp_gap_table(vals, zs, grads, curvature=None)
    alphas = sched.steps
    last = zs.shape[0] - 1
    weighted = alphas[:, None] * grads[:last]
    rhs = sum(
        alphas[i] * (vals[i] - vals[last] + float(np.dot(grads[i], trace.xs[0] - zs[i])))
        for i in range(last)
    )
    rhs -= (rho_power(2 * m) - 1.0) * lam / 2.0 * sqnorm(grads[last])
    rhs -= lam / 2.0 * sqnorm(weighted.sum(axis=0))
    return gap, rhs


def rppa_certificate_check(m: int, instance: ProxFunction, lam: float, x0,
                           rel_tol: float = 1e-9) -> IdentityResidual:
    """Proximal counterpart of ``gd_certificate_check``, phrased in the
    prox outputs and envelope gradients of a silver(m) run."""
    gap, rhs = _rppa_certificate_sides(m, instance, lam, x0)
    mat = build_certificate_matrix(m).entries
    lhs = float((mat * gap).sum())
    return _assert_certificate(lhs, rhs, rel_tol, f"rppa certificate m={m}")


def scaled_certificate_check(m: int, instance: ProxFunction, lam: float, x0,
                             rel_tol: float = 1e-9) -> IdentityResidual:
    """Same identity under the rescaled multipliers 2 T_m / rho^(2m) * A."""
    gap, rhs = _rppa_certificate_sides(m, instance, lam, x0)
    scale = 2.0 * silver_constants(m).t_m / rho_power(2 * m)
    mat = scale * build_certificate_matrix(m).entries
    lhs = float((mat * gap).sum())
    return _assert_certificate(lhs, scale * rhs, rel_tol, f"scaled certificate m={m}")


# ---------------------------------------------------------------------------
# interpolation-gap table equivalence

@dataclass(frozen=True)
class QPTable:
    """Envelope-side and prox-side interpolation gaps over {star, 0..N}^2."""

    q_values: np.ndarray
    p_values: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.abs(self.q_values - self.p_values).max())


def qp_tables(instance: ProxFunction, lam: float, schedule: Schedule, x0) -> QPTable:
    """Build both gap tables from one run; index 0 is the minimizer."""
    trace = run_rppa(instance, lam, schedule, x0)
    star = instance.x_star
    f_star = instance.f_star
    xs = np.vstack([star, trace.xs])
    zs = np.vstack([star, trace.zs])
    grads = np.vstack([np.zeros_like(star), trace.envelope_grads()])
    f_z = np.concatenate([[f_star], trace.fvals])
    envelope = f_z + 0.5 * lam * np.einsum("ij,ij->i", grads, grads)
    q = _interp_gap_table(envelope, xs, grads, curvature=1.0 / lam)
    p = _interp_gap_table(f_z, zs, grads, curvature=None)
    return QPTable(q_values=q, p_values=p)


def qp_equivalence_check(instance: ProxFunction, lam: float, schedule: Schedule, x0) -> float:
    """Assert the two tables agree entrywise (1e-10 * scale) and are
    nonnegative up to rounding; returns the max entry gap."""
    table = qp_tables(instance, lam, schedule, x0)
    if not (np.all(np.isfinite(table.q_values)) and np.all(np.isfinite(table.p_values))):
        raise CertificationError("gap table has nonfinite entries")
    scale = max(1.0, float(np.abs(table.q_values).max()), float(np.abs(table.p_values).max()))
    gap = table.max_gap
    if gap > 1e-10 * scale:
        raise CertificationError(f"gap tables disagree: max |Q - P| = {gap}, scale {scale}")
    low = min(float(table.q_values.min()), float(table.p_values.min()))
    if low < -1e-10 * scale:
        raise CertificationError(f"gap table entry negative beyond tolerance: {low}")
    return gap


# ---------------------------------------------------------------------------
# upper-bound sweep

@dataclass(frozen=True)
class SweepViolation:
    instance_kind: str
    schedule_kind: str
    schedule_params: dict
    lam: float
    measure: Measure
    achieved: float
    bound: float


def default_sweep_schedules() -> list[Schedule]:
    return [
        constant(0.5, 8),
        constant(1.0, 8),
        constant(math.sqrt(2.0), 8),
        tv_schedule(31),
        silver(3),
        right_silver(3),
        left_silver(3),
    ]


def upper_bound_sweep(instances, schedules_list, lam_grid, x0s=None) -> list[SweepViolation]:
    """Run every instance x schedule x lambda combination and record any
    measure exceeding its proved bound.  Violations are collected, never
    raised, so a full sweep always reports everything it found."""
    out: list[SweepViolation] = []
    for inst in instances:
        starts = x0s if x0s is not None else _default_starts(inst)
        for sched in schedules_list:
            for lam in lam_grid:
                bound_map = upper_bounds_for(sched, lam)
                if not bound_map:
                    continue
                for x0 in starts:
                    rep = measures(run_rppa(inst, lam, sched, x0), inst)
                    for measure, bound in bound_map.items():
                        num, den = measure_numerator_denominator(rep, measure)
                        if math.isinf(den):
                            continue  # vacuous normalization (start outside dom f)
                        limit = bound * den * (1.0 + 1e-9) + 1e-12
                        if num > limit:
                            out.append(SweepViolation(inst.kind, sched.kind,
                                                      dict(sched.params), lam,
                                                      measure, num / max(den, 1e-300), bound))
    return out


def _default_starts(inst: ProxFunction) -> list[np.ndarray]:
    rng = np.random.default_rng(0)
    e1 = _unit_x0(inst.dim)
    return [e1, inst.x_star + rng.normal(size=inst.dim), inst.x_star.copy()]


# ---------------------------------------------------------------------------
# trace inequalities

def _rppa_gaps(trace: Trace):
    if trace.zs is None or trace.lam is None:
        raise ValueError("not a relaxed-proximal trace")
    return trace.xs, trace.zs, trace.fvals, trace.schedule.steps, trace.lam


def step_optimality_slacks(trace: Trace, instance: ProxFunction) -> np.ndarray:
    """Normalized slack of the per-step optimality inequality

        f* >= f(z^k) + (||x^{k+1}-x*||^2 - ||x^k-x*||^2) / (2 lam alpha_k)
                    + (2-alpha_k)/(2 lam) ||z^k-x^k||^2

    for every k; entries must be >= -1e-12 up to the involved magnitudes.
    """
    xs, zs, fvals, alphas, lam = _rppa_gaps(trace)
    star = instance.x_star
    f_star = instance.f_star
    out = np.empty(len(alphas))
    for k, a in enumerate(alphas):
        t1 = (sqnorm(xs[k + 1] - star) - sqnorm(xs[k] - star)) / (2.0 * lam * a)
        t2 = (2.0 - a) / (2.0 * lam) * sqnorm(zs[k] - xs[k])
        slack = f_star - fvals[k] - t1 - t2
        out[k] = slack / max(1.0, abs(f_star), abs(fvals[k]), abs(t1), abs(t2))
    return out


def successive_value_slacks(trace: Trace, instance: ProxFunction) -> np.ndarray:
    """Normalized slack of

        f(z^k) >= f(z^{k+1}) + (||z^{k+1}-x^{k+1}||^2 + ||z^{k+1}-z^k||^2
                                - (1-alpha_k)^2 ||z^k-x^k||^2) / (2 lam).
    """
    xs, zs, fvals, alphas, lam = _rppa_gaps(trace)
    out = np.empty(len(alphas))
    for k, a in enumerate(alphas):
        t = (sqnorm(zs[k + 1] - xs[k + 1]) + sqnorm(zs[k + 1] - zs[k])
             - (1.0 - a) ** 2 * sqnorm(zs[k] - xs[k])) / (2.0 * lam)
        slack = fvals[k] - fvals[k + 1] - t
        out[k] = slack / max(1.0, abs(fvals[k]), abs(fvals[k + 1]), abs(t))
    return out


def crossterm_identity_checks(trace: Trace) -> tuple[np.ndarray, np.ndarray]:
    """For steps with alpha_k != 1: the three-term combination equals the
    prox-monotonicity inner product, which is nonnegative.  Returns
    (normalized identity gaps, normalized inner products) over those steps.
    """
    xs, zs, _, alphas, _ = _rppa_gaps(trace)
    gaps, inners = [], []
    for k, a in enumerate(alphas):
        if abs(a - 1.0) < 1e-9:
            continue
        dz = zs[k + 1] - zs[k]
        combo = ((a - 2.0) / (2.0 * (1.0 - a)) * sqnorm(dz)
                 + a / (2.0 * (1.0 - a)) * sqnorm(zs[k + 1] - xs[k + 1])
                 + a * (a - 1.0) / 2.0 * sqnorm(zs[k] - xs[k]))
        ip = float(np.dot((xs[k + 1] - zs[k + 1]) - (xs[k] - zs[k]), dz))
        scale = max(1.0, abs(combo), abs(ip), abs(a / (1.0 - a)) * sqnorm(dz))
        gaps.append((combo - ip) / scale)
        inners.append(ip / scale)
    return np.asarray(gaps), np.asarray(inners)


def double_decrease_slacks(trace: Trace, instance: ProxFunction) -> np.ndarray:
    """Normalized slack of the double sufficient-decrease inequality for a
    constant schedule: one form for alpha in (0, 1], another for (1, 2)."""
    xs, zs, fvals, alphas, lam = _rppa_gaps(trace)
    a = float(alphas[0])
    if not np.all(alphas == a):
        raise ValueError("double sufficient decrease applies to constant schedules")
    if not 0.0 < a < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {a}")
    out = np.empty(len(alphas))
    for k in range(len(alphas)):
        cur = sqnorm(zs[k] - xs[k])
        nxt = sqnorm(zs[k + 1] - xs[k + 1])
        if a <= 1.0:
            t = (a + 1.0) / (2.0 * lam) * nxt + (a - 1.0) / (2.0 * lam) * cur
        else:
            t = 1.0 / (lam * (2.0 - a)) * nxt + (a - 1.0) ** 2 / (lam * (a - 2.0)) * cur
        slack = fvals[k] - fvals[k + 1] - t
        out[k] = slack / max(1.0, abs(fvals[k]), abs(fvals[k + 1]), abs(t))
    return out


# ---------------------------------------------------------------------------
# seeded random instances for the certificate suites

def random_smooth_instance(rng: np.random.Generator, dim: int = 3) -> SmoothFunction:
    if rng.random() < 0.5:
        return Huber(eta=float(np.exp(rng.uniform(-1.0, 1.0))),
                     L=float(np.exp(rng.uniform(-0.7, 0.7))), dim=dim)
    return Quadratic(q=rng.uniform(0.5, 3.0, dim), b=rng.normal(size=dim))


def random_prox_instance(rng: np.random.Generator, dim: int = 3) -> ProxFunction:
    pick = int(rng.integers(0, 5))
    if pick == 0:
        return ScaledNorm(eta=float(np.exp(rng.uniform(-1.0, 1.0))), dim=dim)
    if pick == 1:
        return Huber(eta=float(np.exp(rng.uniform(-1.0, 1.0))),
                     L=float(np.exp(rng.uniform(-0.7, 0.7))), dim=dim)
    if pick == 2:
        return Quadratic(q=rng.uniform(0.5, 3.0, dim), b=rng.normal(size=dim))
    if pick == 3:
        return L1Norm(w=float(np.exp(rng.uniform(-1.0, 0.5))), dim=dim)
    lo = rng.normal(size=dim) - rng.uniform(0.2, 1.0, dim)
    return BoxIndicator(lo=lo, hi=lo + rng.uniform(0.5, 2.0, dim))
