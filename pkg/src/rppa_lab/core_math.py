"""Dense vector helpers and executable forms of the algebraic identities
used throughout the analysis.

Each identity function evaluates both sides independently and returns the
numeric residual, so callers can assert that only floating-point rounding
separates them.  All arithmetic is 64-bit; relative gaps are normalized by
``max(1, |lhs|, |rhs|)`` to stay meaningful near zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "IdentityResidual",
    "as_vector",
    "same_dim",
    "sqnorm",
    "rel_gap",
    "scaled_tol",
    "three_point_identity",
    "convex_combination_identity",
    "young_bounds",
    "tv_implication_check",
    "simplify_identity_1",
    "simplify_identity_2",
    "sample_tv_implication",
    "tv_implication_violations",
]


def as_vector(x) -> np.ndarray:
    """Coerce ``x`` to a finite, nonempty 1-d float64 array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a nonempty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def same_dim(*vecs) -> tuple[np.ndarray, ...]:
    """Validate all arguments as vectors of one common dimension."""
    out = tuple(as_vector(v) for v in vecs)
    dims = {v.shape[0] for v in out}
    if len(dims) > 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return out


def sqnorm(v: np.ndarray) -> float:
    return float(np.dot(v, v))


def rel_gap(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def scaled_tol(*magnitudes: float, base: float = 1e-12) -> float:
    """Absolute tolerance ``base`` scaled by max(1, magnitudes involved)."""
    scale = 1.0
    for m in magnitudes:
        a = abs(m)
        if a > scale:
            scale = a
    return base * scale


@dataclass(frozen=True)
class IdentityResidual:
    """Two independently evaluated sides of an identity."""

    lhs: float
    rhs: float

    @property
    def abs_gap(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_gap(self) -> float:
        return rel_gap(self.lhs, self.rhs)


def three_point_identity(x, y, z, w) -> IdentityResidual:
    """Expand ``2<x-y, z-w>`` into four squared distances."""
    x, y, z, w = same_dim(x, y, z, w)
    lhs = 2.0 * float(np.dot(x - y, z - w))
    rhs = sqnorm(x - w) + sqnorm(y - z) - sqnorm(x - z) - sqnorm(y - w)
    return IdentityResidual(lhs, rhs)


def convex_combination_identity(x, y, theta: float) -> IdentityResidual:
    """Expand ``||theta*x + (1-theta)*y||^2``; ``theta`` may be any real."""
    x, y = same_dim(x, y)
    t = float(theta)
    lhs = sqnorm(t * x + (1.0 - t) * y)
    rhs = t * sqnorm(x) + (1.0 - t) * sqnorm(y) - t * (1.0 - t) * sqnorm(x - y)
    return IdentityResidual(lhs, rhs)


def young_bounds(x, y, kappa: float) -> tuple[bool, bool]:
    """Check both Young-type bounds on ``||x+y||^2`` for a given kappa > 0.

    Returns ``(upper_ok, lower_ok)`` where

        upper_ok:  (1 + 1/kappa)||x||^2 + (1 + kappa)||y||^2 >= ||x+y||^2
        lower_ok:  ||x+y||^2 >= (1 - 1/kappa)||x||^2 + (1 - kappa)||y||^2

    each with slack ``1e-10 * scale``.
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    x, y = same_dim(x, y)
    k = float(kappa)
    sx, sy, sxy = sqnorm(x), sqnorm(y), sqnorm(x + y)
    upper = (1.0 + 1.0 / k) * sx + (1.0 + k) * sy
    lower = (1.0 - 1.0 / k) * sx + (1.0 - k) * sy
    tol = scaled_tol(upper, lower, sxy, base=1e-10)
    return (upper >= sxy - tol, sxy >= lower - tol)


def tv_implication_check(x, y, z, s: float, gamma: float, v: float) -> str:
    """Check the scalar implication behind the dynamic-schedule analysis.

    Hypotheses (for s > 0, gamma >= -s):

        ||x||^2 >= ||y||^2 + s(s+gamma)||z||^2 + s*v
        v <= 2<y,z> - gamma*||z||^2

    imply the conclusion ``v <= ||x||^2 / (2s + gamma)``.  Returns
    ``"vacuous"`` when either hypothesis fails, ``"confirmed"`` when the
    conclusion holds, ``"violated"`` otherwise.  A violated result on valid
    inputs indicates an implementation bug, never a counterexample.
    """
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    if gamma < -s:
        raise ValueError(f"gamma must be >= -s, got gamma={gamma}, s={s}")
    x, y, z = same_dim(x, y, z)
    s = float(s)
    gamma = float(gamma)
    v = float(v)
    sx, sy, sz = sqnorm(x), sqnorm(y), sqnorm(z)
    hyp1_rhs = sy + s * (s + gamma) * sz + s * v
    hyp2_rhs = 2.0 * float(np.dot(y, z)) - gamma * sz
    tol = scaled_tol(sx, hyp1_rhs, v, hyp2_rhs, base=1e-12)
    if sx < hyp1_rhs - tol or v > hyp2_rhs + tol:
        return "vacuous"
    conclusion = sx / (2.0 * s + gamma)
    if v <= conclusion + scaled_tol(v, conclusion, base=1e-10):
        return "confirmed"
    return "violated"


def simplify_identity_1(a, b, c, d, r: float, s: float) -> IdentityResidual:
    """Six-term inner-product expansion against its completed-square form."""
    if r <= 0 or s <= 0:
        raise ValueError(f"r and s must be positive, got r={r}, s={s}")
    a, b, c, d = same_dim(a, b, c, d)
    r = float(r)
    s = float(s)
    lhs = (
        float(np.dot(b, a))
        - 0.5 * (r * r - 1.0) * sqnorm(c)
        - 0.5 * sqnorm(b)
        + (r + 1.0) * float(np.dot(c, a - b - c))
        + 2.0 * r * float(np.dot(d, c - d - s * c))
        + 2.0 * s * float(np.dot(d, a - b - s * c - d))
    )
    e = a - b - (1.0 + r) * c - 2.0 * s * d
    rhs = 0.5 * (sqnorm(a) - sqnorm(e)) + 2.0 * (s * s - s - r) * float(np.dot(d, d - c))
    return IdentityResidual(lhs, rhs)


def simplify_identity_2(b, c, d, r: float, s: float) -> IdentityResidual:
    """Companion expansion used with the reversed long-step schedule."""
    if r <= 0 or s <= 0:
        raise ValueError(f"r and s must be positive, got r={r}, s={s}")
    b, c, d = same_dim(b, c, d)
    r = float(r)
    s = float(s)
    t = b + (s - 1.0) * c + d
    lhs = (
        (s + r) / (r * r)
        * (float(np.dot(b, (1.0 - s) * c + d)) - (r * r - 1.0) * sqnorm(d) - float(np.dot(d, t)))
        - sqnorm(c)
        + (s / r) * float(np.dot(c, t))
    )
    rhs = -(s + r) * sqnorm(d) + (s * s - s - r) / (r * r) * float(np.dot(c, -b + r * c - d))
    return IdentityResidual(lhs, rhs)


def sample_tv_implication(rng: np.random.Generator, dim: int = 4) -> tuple:
    """Draw one (x, y, z, s, gamma, v) tuple satisfying both hypotheses of
    ``tv_implication_check`` by construction: v sits below its cap, and x
    is scaled so the norm inequality holds with random slack."""
    y = rng.normal(size=dim)
    z = rng.normal(size=dim)
    s = float(rng.uniform(1e-3, 10.0))
    gamma = float(rng.uniform(-s, 10.0))
    v = 2.0 * float(np.dot(y, z)) - gamma * sqnorm(z) - abs(float(rng.normal()))
    target = sqnorm(y) + s * (s + gamma) * sqnorm(z) + s * v
    norm_sq = max(target, 0.0) + abs(float(rng.normal()))
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    x = math.sqrt(norm_sq) * direction
    return x, y, z, s, gamma, v


def tv_implication_violations(rng: np.random.Generator, n: int = 10_000) -> int:
    """Count violated results over n hypothesis-satisfying samples."""
    bad = 0
    for _ in range(n):
        x, y, z, s, gamma, v = sample_tv_implication(rng)
        if tv_implication_check(x, y, z, s, gamma, v) == "violated":
            bad += 1
    return bad
