"""Catalog of convex test functions with exact values, proximal maps, and
Moreau envelopes.

Every instance carries its true minimizer ``x_star`` and optimal value
``f_star``, so runs can be scored against the exact optimum without an
inner solver.  The primitive operation is ``prox_step``: the displacement
``prox(x) - x`` in closed form.  Computing the displacement directly (not
as a difference of nearby points) is what keeps long relaxation runs
accurate when the prox barely moves the point.
"""

from __future__ import annotations

import abc
import json
import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from rppa_lab.core_math import as_vector, sqnorm

__all__ = [
    "ProxFunction",
    "SmoothFunction",
    "ScaledNorm",
    "Huber",
    "Quadratic",
    "L1Norm",
    "BoxIndicator",
    "catalog",
    "smooth_catalog",
    "from_json",
]


def _check_lam(lam: float) -> float:
    if lam <= 0 or not math.isfinite(lam):
        raise ValueError(f"lambda must be positive, got {lam}")
    return float(lam)


class ProxFunction(abc.ABC):
    """A proper closed convex function with a closed-form proximal map."""

    kind: ClassVar[str]
    dim: int

    def check(self, x) -> np.ndarray:
        v = as_vector(x)
        if v.shape[0] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {v.shape[0]}")
        return v

    @property
    @abc.abstractmethod
    def x_star(self) -> np.ndarray:
        """A minimizer."""

    @property
    @abc.abstractmethod
    def f_star(self) -> float:
        """The optimal value."""

    @abc.abstractmethod
    def value(self, x) -> float:
        """Function value; may be +inf outside the effective domain."""

    @abc.abstractmethod
    def prox_step(self, x, lam: float) -> np.ndarray:
        """The displacement prox(x) - x, evaluated without cancellation."""

    def prox(self, x, lam: float) -> np.ndarray:
        """argmin_y f(y) + ||y - x||^2 / (2 lam)."""
        return self.check(x) + self.prox_step(x, lam)

    def prox_pair(self, x, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """(prox(x), prox(x) - x) as one consistent pair: the returned point
        is exactly the displaced point, and the displacement is exactly the
        closed form, whichever of the two the kind computes natively."""
        step = self.prox_step(x, lam)
        return self.check(x) + step, step

    def moreau_value(self, x, lam: float) -> float:
        """Envelope value f(z) + ||x - z||^2 / (2 lam) at z = prox(x)."""
        z, step = self.prox_pair(x, lam)
        return self.value(z) + sqnorm(step) / (2.0 * _check_lam(lam))

    def moreau_grad(self, x, lam: float) -> np.ndarray:
        """Envelope gradient (x - prox(x)) / lam."""
        return -self.prox_step(x, lam) / _check_lam(lam)

    @abc.abstractmethod
    def params(self) -> dict:
        """JSON-serializable constructor parameters."""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params(),
            "dimension": self.dim,
            "x_star": self.x_star.tolist(),
            "f_star": self.f_star,
        }


class SmoothFunction(abc.ABC):
    """Mixin for instances with a Lipschitz gradient (the GD substrate)."""

    @property
    @abc.abstractmethod
    def lipschitz_L(self) -> float: ...

    @abc.abstractmethod
    def grad(self, x) -> np.ndarray: ...

    def value_and_grad(self, x) -> tuple[float, np.ndarray]:
        return self.value(x), self.grad(x)


@dataclass(frozen=True)
class ScaledNorm(ProxFunction):
    """f(x) = eta * ||x||_2 with eta > 0; prox is the block soft-threshold."""

    eta: float
    dim: int = 2
    kind: ClassVar[str] = "scaled_norm"

    def __post_init__(self):
        if self.eta <= 0 or not math.isfinite(self.eta):
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    @property
    def x_star(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def f_star(self) -> float:
        return 0.0

    def value(self, x) -> float:
        return self.eta * float(np.linalg.norm(self.check(x)))

    def prox_step(self, x, lam: float) -> np.ndarray:
        x = self.check(x)
        lam = _check_lam(lam)
        r = float(np.linalg.norm(x))
        if r <= lam * self.eta:
            return -x  # prox collapses to the unique minimizer 0
        return (-lam * self.eta / r) * x

    def params(self) -> dict:
        return {"eta": self.eta}


@dataclass(frozen=True)
class Huber(ProxFunction, SmoothFunction):
    """Radial Huber: L||x||^2/2 for ||x|| <= eta/L, else eta||x|| - eta^2/(2L).

    L-smooth and convex; minimized at 0 with value 0.  The two prox
    branches meet continuously at ||x|| = (1 + lam L) eta / L.
    """

    eta: float
    L: float
    dim: int = 2
    kind: ClassVar[str] = "huber"

    def __post_init__(self):
        if self.eta <= 0 or self.L <= 0:
            raise ValueError(f"eta and L must be positive, got eta={self.eta}, L={self.L}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    @property
    def x_star(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def f_star(self) -> float:
        return 0.0

    @property
    def lipschitz_L(self) -> float:
        return self.L

    @property
    def radius(self) -> float:
        """Interface between the quadratic and linear branches."""
        return self.eta / self.L

    def value(self, x) -> float:
        r = float(np.linalg.norm(self.check(x)))
        if r <= self.radius:
            return 0.5 * self.L * r * r
        return self.eta * r - self.eta * self.eta / (2.0 * self.L)

    def grad(self, x) -> np.ndarray:
        x = self.check(x)
        r = float(np.linalg.norm(x))
        if r <= self.radius:
            return self.L * x
        return (self.eta / r) * x

    def prox_step(self, x, lam: float) -> np.ndarray:
        x = self.check(x)
        lam = _check_lam(lam)
        r = float(np.linalg.norm(x))
        if r <= (1.0 + lam * self.L) * self.radius:
            return (-lam * self.L / (1.0 + lam * self.L)) * x
        return (-lam * self.eta / r) * x

    def params(self) -> dict:
        return {"eta": self.eta, "L": self.L}


@dataclass(frozen=True)
class Quadratic(ProxFunction, SmoothFunction):
    """Separable quadratic f(x) = 1/2 sum_i q_i (x_i - b_i)^2 with q_i > 0."""

    q: np.ndarray
    b: np.ndarray
    kind: ClassVar[str] = "quadratic"

    def __post_init__(self):
        q = as_vector(self.q)
        b = as_vector(self.b)
        if q.shape != b.shape:
            raise ValueError("q and b must share a dimension")
        if np.any(q <= 0):
            raise ValueError("all curvatures q_i must be positive")
        q.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return int(self.q.size)

    @property
    def x_star(self) -> np.ndarray:
        return self.b.copy()

    @property
    def f_star(self) -> float:
        return 0.0

    @property
    def lipschitz_L(self) -> float:
        return float(self.q.max())

    def value(self, x) -> float:
        d = self.check(x) - self.b
        return 0.5 * float(np.dot(self.q, d * d))

    def grad(self, x) -> np.ndarray:
        return self.q * (self.check(x) - self.b)

    def prox_step(self, x, lam: float) -> np.ndarray:
        x = self.check(x)
        lam = _check_lam(lam)
        return lam * self.q * (self.b - x) / (1.0 + lam * self.q)

    def params(self) -> dict:
        return {"q": self.q.tolist(), "b": self.b.tolist()}


@dataclass(frozen=True)
class L1Norm(ProxFunction):
    """f(x) = w * ||x||_1 with w > 0; prox is componentwise soft-threshold."""

    w: float
    dim: int = 2
    kind: ClassVar[str] = "l1"

    def __post_init__(self):
        if self.w <= 0 or not math.isfinite(self.w):
            raise ValueError(f"w must be positive, got {self.w}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")

    @property
    def x_star(self) -> np.ndarray:
        return np.zeros(self.dim)

    @property
    def f_star(self) -> float:
        return 0.0

    def value(self, x) -> float:
        return self.w * float(np.abs(self.check(x)).sum())

    def prox_step(self, x, lam: float) -> np.ndarray:
        x = self.check(x)
        t = _check_lam(lam) * self.w
        return np.where(np.abs(x) <= t, -x, -t * np.sign(x))

    def params(self) -> dict:
        return {"w": self.w}


@dataclass(frozen=True)
class BoxIndicator(ProxFunction):
    """Indicator of the box [lo, hi]: 0 inside, +inf outside; prox clamps."""

    lo: np.ndarray
    hi: np.ndarray
    kind: ClassVar[str] = "box"

    def __post_init__(self):
        lo = as_vector(self.lo)
        hi = as_vector(self.hi)
        if lo.shape != hi.shape:
            raise ValueError("lo and hi must share a dimension")
        if np.any(lo > hi):
            raise ValueError("need lo <= hi componentwise")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return int(self.lo.size)

    @property
    def x_star(self) -> np.ndarray:
        return np.clip(np.zeros(self.dim), self.lo, self.hi)

    @property
    def f_star(self) -> float:
        return 0.0

    def value(self, x) -> float:
        x = self.check(x)
        return 0.0 if bool(np.all((x >= self.lo) & (x <= self.hi))) else math.inf

    def prox(self, x, lam: float) -> np.ndarray:
        _check_lam(lam)
        return np.clip(self.check(x), self.lo, self.hi)

    def prox_step(self, x, lam: float) -> np.ndarray:
        return self.prox(x, lam) - self.check(x)

    def prox_pair(self, x, lam: float) -> tuple[np.ndarray, np.ndarray]:
        # the clamp is the native form here; re-adding the step to x could
        # overshoot the box by one ulp and put the point outside dom f
        z = self.prox(x, lam)
        return z, z - self.check(x)

    def params(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


_KINDS = {cls.kind: cls for cls in (ScaledNorm, Huber, Quadratic, L1Norm, BoxIndicator)}


def from_json(obj: dict | str) -> ProxFunction:
    """Rebuild an instance from its ``to_json`` dict (or a JSON string)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    cls = _KINDS[kind]
    params = dict(obj["params"])
    if kind in ("scaled_norm", "huber", "l1"):
        params["dim"] = int(obj.get("dimension", 2))
    return cls(**params)


def catalog(dim: int = 2) -> list[ProxFunction]:
    """Default instance collection used by sweeps, tests, and the CLI."""
    q = np.linspace(1.0, 3.0, dim)
    b = np.where(np.arange(dim) % 2 == 0, 0.5, -0.25)
    lo = np.where(np.arange(dim) % 2 == 0, -1.0, -0.5)
    hi = np.where(np.arange(dim) % 2 == 0, 0.5, 1.0)
    return [
        ScaledNorm(eta=1.0, dim=dim),
        Huber(eta=1.0, L=1.0, dim=dim),
        Quadratic(q=q, b=b),
        L1Norm(w=0.7, dim=dim),
        BoxIndicator(lo=lo, hi=hi),
    ]


def smooth_catalog(dim: int = 2) -> list[ProxFunction]:
    """The catalog entries that also expose a gradient."""
    return [inst for inst in catalog(dim) if isinstance(inst, SmoothFunction)]
