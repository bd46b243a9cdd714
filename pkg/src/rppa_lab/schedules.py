"""Stepsize / relaxation schedules and their derived constants.

Six kinds are supported: ``constant``, ``tv`` (the dynamic schedule whose
steps climb from sqrt(2) toward 2), ``silver`` (length 2^m - 1, built by
the palindromic doubling recursion around the silver ratio rho = 1+sqrt(2)),
``right_silver`` / ``left_silver`` (silver plus one long step gamma_m
appended or prepended), and ``explicit`` for user-supplied step vectors.

Every constructor validates the defining identities of its kind after
construction, so a returned Schedule is internally consistent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from rppa_lab.core_math import scaled_tol

__all__ = [
    "RHO",
    "MAX_M",
    "MAX_LEN",
    "SilverConstants",
    "Schedule",
    "silver_constants",
    "rho_power",
    "constant",
    "tv_schedule",
    "silver",
    "right_silver",
    "left_silver",
    "explicit",
    "format_steps",
]

SQRT2 = math.sqrt(2.0)

#: the silver ratio, the positive root of rho^2 = 2*rho + 1
RHO = 1.0 + SQRT2

#: caps chosen for desk scale; double precision is ample well past these
MAX_M = 20
MAX_LEN = 2**20


def rho_power(m: int) -> float:
    """rho**m by repeated multiplication (exactly reproducible)."""
    out = 1.0
    for _ in range(int(m)):
        out *= RHO
    return out


@dataclass(frozen=True)
class SilverConstants:
    """Derived constants for the silver family at a given level m."""

    m: int
    rho: float
    gamma_m: float
    t_m: float


def silver_constants(m: int) -> SilverConstants:
    """gamma_m = (1 + sqrt(1 + 4 rho^m))/2, the positive root of
    gamma^2 = gamma + rho^m, and T_m = gamma_m + rho^m = gamma_m^2."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    rm = rho_power(m)
    gamma = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * rm))
    return SilverConstants(m=int(m), rho=RHO, gamma_m=gamma, t_m=gamma + rm)


@dataclass(frozen=True)
class Schedule:
    """An immutable positive step vector with provenance metadata.

    ``params`` records how the steps were generated (e.g. ``{"m": 3}`` or
    ``{"alpha": 1.0, "n": 5}``) so bound formulas can use the closed form
    matching the kind.
    """

    kind: str
    steps: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=float)
        if steps.ndim != 1 or steps.size == 0:
            raise ValueError("schedule needs at least one step")
        if steps.size > MAX_LEN:
            raise ValueError(f"schedule length {steps.size} exceeds cap {MAX_LEN}")
        if not np.all(np.isfinite(steps)) or np.any(steps <= 0):
            raise ValueError("all steps must be positive and finite")
        steps.flags.writeable = False
        object.__setattr__(self, "steps", steps)

    @property
    def n_steps(self) -> int:
        return int(self.steps.size)

    @cached_property
    def partial_sums(self) -> np.ndarray:
        """A_k = sum of steps 0..k, for each k."""
        sums = np.cumsum(self.steps)
        sums.flags.writeable = False
        return sums

    @cached_property
    def total(self) -> float:
        """Exactly rounded sum of all steps."""
        return math.fsum(self.steps.tolist())

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "steps": self.steps.tolist()}

    @staticmethod
    def from_json(obj: dict | str) -> "Schedule":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return Schedule(kind=obj["kind"], steps=np.asarray(obj["steps"], dtype=float),
                        params=dict(obj.get("params", {})))


def constant(alpha: float, n: int) -> Schedule:
    """n copies of a single positive relaxation parameter."""
    if alpha <= 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Schedule("constant", np.full(int(n), float(alpha)), {"alpha": float(alpha), "n": int(n)})


def tv_schedule(n: int) -> Schedule:
    """Dynamic schedule: alpha_0 = sqrt(2) and each later step solves
    alpha^2 - 2 = (2 - alpha) * A_{k-1} given the running sum A_{k-1}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_LEN:
        raise ValueError(f"n={n} exceeds cap {MAX_LEN}")
    steps = np.empty(int(n))
    a_prev = 0.0
    for k in range(int(n)):
        # rationalized root of the step quadratic; no cancellation for large sums
        steps[k] = 4.0 * (a_prev + 1.0) / (a_prev + math.sqrt(a_prev * a_prev + 8.0 * (a_prev + 1.0)))
        a_prev += steps[k]
    sched = Schedule("tv", steps, {"n": int(n)})
    _validate_tv(sched)
    return sched


def _validate_tv(sched: Schedule):
    steps = sched.steps
    sums = sched.partial_sums
    for k in range(sched.n_steps):
        a = steps[k]
        a_prev = sums[k - 1] if k > 0 else 0.0
        if not (SQRT2 - 1e-12 <= a < 2.0):
            raise AssertionError(f"tv step {k}={a} outside [sqrt(2), 2)")
        lhs = a * a - 2.0
        rhs = (2.0 - a) * a_prev
        if abs(lhs - rhs) > scaled_tol(lhs, rhs, a_prev):
            raise AssertionError(f"tv step identity failed at k={k}: {lhs} vs {rhs}")
        ratio = 2.0 * (1.0 + sums[k]) / (2.0 + sums[k])
        if abs(a - ratio) > scaled_tol(a, ratio):
            raise AssertionError(f"tv ratio identity failed at k={k}")


def _silver_steps(m: int) -> np.ndarray:
    steps = [SQRT2]
    for i in range(1, int(m)):
        steps = steps + [1.0 + rho_power(i - 1)] + steps
    return np.array(steps)


def silver(m: int) -> Schedule:
    """Palindromic schedule of length 2^m - 1 with total rho^m - 1."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > MAX_M:
        raise ValueError(f"m={m} exceeds cap {MAX_M}")
    sched = Schedule("silver", _silver_steps(m), {"m": int(m)})
    steps = sched.steps
    if steps.size != 2**m - 1 or not np.array_equal(steps, steps[::-1]):
        raise AssertionError("silver construction lost its palindrome")
    expected = rho_power(m) - 1.0
    if abs(sched.total - expected) > 1e-12 * max(1.0, expected):
        raise AssertionError(f"silver total {sched.total} != rho^m - 1 = {expected}")
    return sched


def right_silver(m: int) -> Schedule:
    """Silver schedule with gamma_m appended; length 2^m, 1 + total = T_m."""
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m > MAX_M:
        raise ValueError(f"m={m} exceeds cap {MAX_M}")
    consts = silver_constants(m)
    if m == 0:
        steps = np.array([consts.gamma_m])
    else:
        steps = np.append(_silver_steps(m), consts.gamma_m)
    sched = Schedule("right_silver", steps, {"m": int(m)})
    if abs(1.0 + sched.total - consts.t_m) > 1e-12 * max(1.0, consts.t_m):
        raise AssertionError(f"right silver total {sched.total} inconsistent with T_m {consts.t_m}")
    return sched


def left_silver(m: int) -> Schedule:
    """Mirror of the right silver schedule: gamma_m prepended."""
    mirrored = right_silver(m)
    return Schedule("left_silver", mirrored.steps[::-1].copy(), {"m": int(m)})


def explicit(steps) -> Schedule:
    """User-supplied step vector; only positivity/finiteness is validated."""
    return Schedule("explicit", np.asarray(steps, dtype=float), {})


def format_steps(sched: Schedule, decimals: int = 6) -> list[str]:
    """Steps formatted one per entry at fixed precision (table style)."""
    return [f"{s:.{decimals}f}" for s in sched.steps]
