"""Iteration drivers with full trace capture.

``run_rppa`` performs the relaxed proximal loop

    z^k = prox(x^k),   x^{k+1} = x^k + alpha_k (z^k - x^k),

finishing with z^N = prox(x^N).  ``run_gd`` performs plain gradient descent
with steps normalized by the Lipschitz constant.  Both record every iterate
so downstream checks can examine interior steps, and both raise
``NumericalFailure`` (with the failing step index) on the first nonfinite
intermediate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from rppa_lab.core_math import as_vector, sqnorm
from rppa_lab.prox_library import ProxFunction, SmoothFunction
from rppa_lab.schedules import Schedule

__all__ = [
    "NumericalFailure",
    "Trace",
    "MeasureReport",
    "run_rppa",
    "run_gd",
    "rppa_gd_equivalence",
    "measures",
    "gd_measures",
    "write_trace_jsonl",
    "report_csv",
]


class NumericalFailure(RuntimeError):
    """An iterate became nonfinite at the recorded step."""

    def __init__(self, step: int, detail: str):
        super().__init__(f"nonfinite iterate at step {step}: {detail}")
        self.step = step


@dataclass(frozen=True)
class Trace:
    """Full iterate history of one run.

    ``xs`` has N+1 rows.  For relaxed proximal runs ``zs`` also has N+1
    rows (the last is the output prox), ``fvals`` holds f(z^k), and
    ``grad_norms`` holds ||x^k - z^k|| / lam, the envelope-gradient norm.
    For gradient descent runs ``zs``/``lam`` are None, ``fvals`` holds
    h(x^k), and ``grad_norms`` holds ||grad h(x^k)||.
    """

    xs: np.ndarray
    zs: Optional[np.ndarray]
    fvals: np.ndarray
    grad_norms: np.ndarray
    schedule: Schedule
    lam: Optional[float]

    @property
    def n_steps(self) -> int:
        return self.xs.shape[0] - 1

    def envelope_grads(self) -> np.ndarray:
        """(x^k - z^k) / lam for every k; relaxed-proximal traces only."""
        if self.zs is None or self.lam is None:
            raise ValueError("not a relaxed-proximal trace")
        return (self.xs - self.zs) / self.lam


@dataclass(frozen=True)
class MeasureReport:
    """Endpoint performance measures of a run, relative to the optimum.

    ``composite`` is f(z^N) + (lam/2)||grad||^2 - f_star and is None for
    gradient-descent traces, where no envelope is involved.
    """

    fval_residual: float
    subgrad_norm: float
    composite: Optional[float]
    init_dist_sq: float
    init_fval_gap: float


def _guard_finite(v: np.ndarray, step: int, what: str):
    if not np.all(np.isfinite(v)):
        raise NumericalFailure(step, what)


def run_rppa(instance: ProxFunction, lam: float, schedule: Schedule, x0) -> Trace:
    """Run the relaxed proximal loop and return its trace.

    The update is applied as ``x + alpha * step`` with ``step`` the
    closed-form prox displacement, so accuracy does not degrade when the
    displacement is tiny relative to the iterate.
    """
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError(f"lambda must be positive, got {lam}")
    x = instance.check(as_vector(x0)).astype(float).copy()
    n = schedule.n_steps
    d = x.size
    xs = np.empty((n + 1, d))
    zs = np.empty((n + 1, d))
    fvals = np.empty(n + 1)
    grad_norms = np.empty(n + 1)
    # nonfinite detection is explicit below; silence the transient IEEE
    # warnings a diverging run emits before the guard trips
    with np.errstate(over="ignore", invalid="ignore"):
        for k, alpha in enumerate(schedule.steps):
            xs[k] = x
            z, step = instance.prox_pair(x, lam)
            _guard_finite(step, k, "prox step")
            zs[k] = z
            fvals[k] = instance.value(z)
            grad_norms[k] = float(np.linalg.norm(step)) / lam
            x = x + alpha * step
            _guard_finite(x, k, "relaxation update")
        xs[n] = x
        z, step = instance.prox_pair(x, lam)
        _guard_finite(step, n, "output prox")
        zs[n] = z
        fvals[n] = instance.value(z)
        grad_norms[n] = float(np.linalg.norm(step)) / lam
    for arr in (xs, zs, fvals, grad_norms):
        arr.flags.writeable = False
    return Trace(xs=xs, zs=zs, fvals=fvals, grad_norms=grad_norms, schedule=schedule, lam=float(lam))


def run_gd(instance: SmoothFunction, schedule: Schedule, x0) -> Trace:
    """Run gradient descent with steps alpha_k / L and return its trace."""
    x = instance.check(as_vector(x0)).astype(float).copy()
    L = instance.lipschitz_L
    n = schedule.n_steps
    xs = np.empty((n + 1, x.size))
    fvals = np.empty(n + 1)
    grad_norms = np.empty(n + 1)
    with np.errstate(over="ignore", invalid="ignore"):
        for k, alpha in enumerate(schedule.steps):
            xs[k] = x
            g = instance.grad(x)
            _guard_finite(g, k, "gradient")
            fvals[k] = instance.value(x)
            grad_norms[k] = float(np.linalg.norm(g))
            x = x - (alpha / L) * g
            _guard_finite(x, k, "descent update")
        xs[n] = x
        g = instance.grad(x)
        _guard_finite(g, n, "gradient")
        fvals[n] = instance.value(x)
        grad_norms[n] = float(np.linalg.norm(g))
    for arr in (xs, fvals, grad_norms):
        arr.flags.writeable = False
    return Trace(xs=xs, zs=None, fvals=fvals, grad_norms=grad_norms, schedule=schedule, lam=None)


def rppa_gd_equivalence(instance: ProxFunction, lam: float, schedule: Schedule, x0) -> float:
    """Max iterate gap between the relaxed proximal run and gradient descent
    on the Moreau envelope (Lipschitz constant 1/lam).  The two recursions
    are algebraically identical, so the gap is pure rounding."""
    trace = run_rppa(instance, lam, schedule, x0)
    x = instance.check(as_vector(x0)).astype(float).copy()
    worst = 0.0
    for k, alpha in enumerate(schedule.steps):
        worst = max(worst, float(np.linalg.norm(trace.xs[k] - x)))
        x = x - alpha * lam * instance.moreau_grad(x, lam)
    worst = max(worst, float(np.linalg.norm(trace.xs[-1] - x)))
    return worst


def measures(trace: Trace, instance: ProxFunction) -> MeasureReport:
    """Endpoint measures of a relaxed-proximal trace."""
    if trace.zs is None or trace.lam is None:
        raise ValueError("trace was not produced by run_rppa")
    f_star = instance.f_star
    fval_residual = float(trace.fvals[-1]) - f_star
    if fval_residual < -1e-12 * max(1.0, abs(f_star)):
        # a negative residual means the instance metadata lies about f_star
        raise ValueError(f"attained value undercuts the declared optimum by {-fval_residual}")
    subgrad_norm = float(trace.grad_norms[-1])
    composite = fval_residual + 0.5 * trace.lam * subgrad_norm**2
    x0 = trace.xs[0]
    return MeasureReport(
        fval_residual=fval_residual,
        subgrad_norm=subgrad_norm,
        composite=composite,
        init_dist_sq=sqnorm(x0 - instance.x_star),
        init_fval_gap=instance.value(x0) - f_star,
    )


def gd_measures(trace: Trace, instance: SmoothFunction) -> MeasureReport:
    """Endpoint measures of a gradient-descent trace."""
    if trace.zs is not None:
        raise ValueError("trace was not produced by run_gd")
    f_star = instance.f_star
    x0 = trace.xs[0]
    return MeasureReport(
        fval_residual=float(trace.fvals[-1]) - f_star,
        subgrad_norm=float(trace.grad_norms[-1]),
        composite=None,
        init_dist_sq=sqnorm(x0 - instance.x_star),
        init_fval_gap=instance.value(x0) - f_star,
    )


def write_trace_jsonl(trace: Trace, path):
    """One JSON record per step: {k, x, z, f_z, grad_norm}."""
    with open(path, "w") as fh:
        for k in range(trace.xs.shape[0]):
            rec = {
                "k": k,
                "x": trace.xs[k].tolist(),
                "z": trace.zs[k].tolist() if trace.zs is not None else None,
                "f_z": float(trace.fvals[k]),
                "grad_norm": float(trace.grad_norms[k]),
            }
            fh.write(json.dumps(rec) + "\n")


def report_csv(report: MeasureReport) -> str:
    """Two-line CSV rendering of a measure report."""
    fields = ["fval_residual", "subgrad_norm", "composite", "init_dist_sq", "init_fval_gap"]
    vals = [getattr(report, f) for f in fields]
    row = ",".join("" if v is None else repr(float(v)) for v in vals)
    return ",".join(fields) + "\n" + row + "\n"
