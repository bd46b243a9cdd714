"""Closed-form worst-case bounds, keyed by (schedule kind, performance measure).

Upper bounds exist only on the parameter ranges where they are proved;
requests outside a validity range raise rather than extrapolate (constant
relaxation above sqrt(2) in particular).  Lower bounds hold for every
positive schedule and depend only on the step total.
"""

from __future__ import annotations

import math
from enum import Enum

from rppa_lab.schedules import (
    SQRT2,
    Schedule,
    rho_power,
    silver_constants,
    tv_schedule,
)

__all__ = [
    "Measure",
    "BoundRangeError",
    "lower_bound",
    "upper_constant_fval",
    "upper_constant_subgrad",
    "upper_tv_fval",
    "upper_silver_rppa",
    "upper_right_silver_fval",
    "upper_left_silver_subgrad_sq",
    "upper_gd_silver",
    "gd_silver_pre_tight_fval",
    "upper_bounds_for",
    "BNB_PEP_FVAL_DIST",
    "TIGHT_PAIRS",
    "GD_TIGHT_PAIRS",
]


class Measure(str, Enum):
    """Performance measures, each a ratio against an initial quantity."""

    FVAL_OVER_DIST_SQ = "fval_over_dist_sq"            # (f(z^N) - f*) / ||x0 - x*||^2
    SUBGRAD_OVER_DIST = "subgrad_over_dist"            # ||grad|| / ||x0 - x*||
    SUBGRAD_SQ_OVER_FVAL = "subgrad_sq_over_fval"      # ||grad||^2 / (f(x0) - f*)
    COMPOSITE_OVER_DIST_SQ = "composite_over_dist_sq"  # (f(z^N) + lam/2 ||grad||^2 - f*) / ||x0 - x*||^2


class BoundRangeError(ValueError):
    """Requested parameters lie outside a bound's proven validity range."""


#: (schedule kind, measure) pairs whose upper bound is met exactly by a
#: scaled-norm worst instance.
TIGHT_PAIRS = (
    ("constant", Measure.FVAL_OVER_DIST_SQ),
    ("constant", Measure.SUBGRAD_OVER_DIST),
    ("tv", Measure.FVAL_OVER_DIST_SQ),
    ("silver", Measure.SUBGRAD_OVER_DIST),
    ("right_silver", Measure.FVAL_OVER_DIST_SQ),
    ("left_silver", Measure.SUBGRAD_SQ_OVER_FVAL),
)

#: gradient-descent pairs met exactly by a Huber worst instance.
GD_TIGHT_PAIRS = (
    ("gd_silver", Measure.FVAL_OVER_DIST_SQ),
    ("gd_silver", Measure.SUBGRAD_OVER_DIST),
)

#: Table of externally computed global-search optima for the fval measure
#: at lambda = 1, keyed by N.  Stored for comparison only, never computed.
BNB_PEP_FVAL_DIST = {1: 0.095492, 2: 0.054900, 4: 0.028429, 8: 0.013422}


def _check_lam(lam: float):
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError(f"lambda must be positive, got {lam}")


def lower_bound(schedule: Schedule, lam: float, measure: Measure) -> float:
    """Best achievable value of a measure for any run under this schedule;
    depends on the schedule only through 1 + total."""
    _check_lam(lam)
    denom = 1.0 + schedule.total
    if measure == Measure.SUBGRAD_OVER_DIST:
        return 1.0 / (lam * denom)
    if measure == Measure.FVAL_OVER_DIST_SQ:
        return 1.0 / (4.0 * lam * denom)
    if measure == Measure.SUBGRAD_SQ_OVER_FVAL:
        return 1.0 / (lam * denom)
    raise ValueError(f"no lower bound for measure {measure}")


def _check_constant_range(alpha: float):
    if not 0.0 < alpha <= SQRT2:
        raise BoundRangeError(f"constant bound proved only for alpha in (0, sqrt(2)], got {alpha}")


def upper_constant_fval(alpha: float, n: int, lam: float) -> float:
    """1 / (4 lam (alpha N + 1)) for alpha in (0, sqrt(2)]."""
    _check_constant_range(alpha)
    _check_lam(lam)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 / (4.0 * lam * (alpha * n + 1.0))


def upper_constant_subgrad(alpha: float, n: int, lam: float) -> float:
    """1 / (lam (alpha N + 1)) for alpha in (0, sqrt(2)]."""
    _check_constant_range(alpha)
    _check_lam(lam)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 / (lam * (alpha * n + 1.0))


def upper_tv_fval(n: int, lam: float) -> float:
    """1 / (4 lam (A_{N-1} + 1)) with A from the dynamic schedule."""
    _check_lam(lam)
    return 1.0 / (4.0 * lam * (tv_schedule(n).total + 1.0))


def upper_silver_rppa(m: int, lam: float, measure: Measure) -> float:
    """Silver-schedule bounds: composite 1/((4 rho^m - 2) lam) and
    gradient norm 1/(rho^m lam)."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    _check_lam(lam)
    rm = rho_power(m)
    if measure == Measure.COMPOSITE_OVER_DIST_SQ:
        return 1.0 / ((4.0 * rm - 2.0) * lam)
    if measure == Measure.SUBGRAD_OVER_DIST:
        return 1.0 / (rm * lam)
    raise ValueError(f"unsupported measure {measure} for the silver schedule")


def upper_right_silver_fval(m: int, lam: float) -> float:
    """1 / (4 lam T_m)."""
    _check_lam(lam)
    return 1.0 / (4.0 * lam * silver_constants(m).t_m)


def upper_left_silver_subgrad_sq(m: int, lam: float) -> float:
    """1 / (lam T_m), bounding ||grad||^2 / (f(x0) - f*)."""
    _check_lam(lam)
    return 1.0 / (lam * silver_constants(m).t_m)


def upper_gd_silver(m: int, L: float, measure: Measure) -> float:
    """Tight gradient-descent bounds under the silver schedule:
    L/(4 rho^m - 2) for values, L/rho^m for gradient norms."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    rm = rho_power(m)
    if measure == Measure.FVAL_OVER_DIST_SQ:
        return L / (4.0 * rm - 2.0)
    if measure == Measure.SUBGRAD_OVER_DIST:
        return L / rm
    raise ValueError(f"unsupported measure {measure} for gradient descent")


def gd_silver_pre_tight_fval(m: int, L: float) -> float:
    """The earlier, non-tight value bound L / (1 + sqrt(4 rho^(2m-3) - 3)),
    kept as a comparison fixture; defined for m >= 2."""
    if m < 2:
        raise ValueError(f"comparison fixture defined for m >= 2, got {m}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    return L / (1.0 + math.sqrt(4.0 * rho_power(2 * m - 3) - 3.0))


def upper_bounds_for(schedule: Schedule, lam: float) -> dict[Measure, float]:
    """Every proved upper bound applicable to a schedule, as measure -> value.

    Constant schedules above sqrt(2) and explicit schedules carry no proved
    bound, so they map to an empty dict.
    """
    kind = schedule.kind
    if kind == "constant":
        alpha = schedule.params["alpha"]
        n = schedule.n_steps
        if alpha > SQRT2:
            return {}
        return {
            Measure.FVAL_OVER_DIST_SQ: upper_constant_fval(alpha, n, lam),
            Measure.SUBGRAD_OVER_DIST: upper_constant_subgrad(alpha, n, lam),
        }
    if kind == "tv":
        _check_lam(lam)
        return {Measure.FVAL_OVER_DIST_SQ: 1.0 / (4.0 * lam * (schedule.total + 1.0))}
    if kind == "silver":
        m = schedule.params["m"]
        return {
            Measure.SUBGRAD_OVER_DIST: upper_silver_rppa(m, lam, Measure.SUBGRAD_OVER_DIST),
            Measure.COMPOSITE_OVER_DIST_SQ: upper_silver_rppa(m, lam, Measure.COMPOSITE_OVER_DIST_SQ),
        }
    if kind == "right_silver":
        return {Measure.FVAL_OVER_DIST_SQ: upper_right_silver_fval(schedule.params["m"], lam)}
    if kind == "left_silver":
        return {Measure.SUBGRAD_SQ_OVER_FVAL: upper_left_silver_subgrad_sq(schedule.params["m"], lam)}
    return {}
