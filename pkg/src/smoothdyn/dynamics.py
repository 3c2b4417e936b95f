"""Right-hand side of the smoothed inertial dynamic.

The second-order system

    x'' + (alpha / t) x' + grad_x f~(x, mu(t)) = g(t)

is rewritten in phase space ``(x, v)`` as ``x' = v``,
``v' = -(alpha/t) v - grad_x f~(x, mu(t)) + g(t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .schedule import MuSchedule
from .smoothing import SmoothedFunction

__all__ = ["Perturbation", "DynamicSpec", "PhaseState", "rhs", "lipschitz_bound"]


@dataclass(frozen=True)
class Perturbation:
    """Exponentially decaying forcing ``g(t) = a * exp(-b t) * direction``."""

    a: float
    b: float
    direction: np.ndarray

    def __post_init__(self):
        d = np.array(self.direction, dtype=float)
        if d.ndim != 1:
            raise ValueError("direction must be a vector")
        nd = np.linalg.norm(d)
        if nd == 0:
            raise ValueError("direction must be nonzero")
        if not self.b > 0:
            raise ValueError(f"decay rate b must be positive, got {self.b}")
        d = d / nd
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def along_ones(cls, a: float, b: float, dim: int) -> "Perturbation":
        return cls(a, b, np.ones(dim))

    def __call__(self, t: float) -> np.ndarray:
        return (self.a * math.exp(-self.b * t)) * self.direction

    def norm(self, t: float) -> float:
        return abs(self.a) * math.exp(-self.b * t)

    def integral_norm(self, t0: float) -> float:
        """``int_{t0}^inf ||g(s)|| ds``."""
        return abs(self.a) * math.exp(-self.b * t0) / self.b

    def integral_t_norm(self, t0: float) -> float:
        """``int_{t0}^inf s ||g(s)|| ds``."""
        return abs(self.a) * math.exp(-self.b * t0) * (t0 / self.b + 1.0 / self.b**2)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "direction": self.direction.tolist()}


class PhaseState(NamedTuple):
    t: float
    x: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class DynamicSpec:
    alpha: float
    t0: float
    objective: SmoothedFunction
    schedule: MuSchedule
    perturbation: Optional[Perturbation] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.schedule.t0 != self.t0:
            raise ValueError(
                f"schedule starts at t0={self.schedule.t0} but the dynamic starts at t0={self.t0}"
            )
        if self.perturbation is not None and self.perturbation.direction.shape[0] != self.dim:
            raise ValueError("perturbation direction does not match the objective dimension")

    @property
    def dim(self) -> int:
        return self.objective.dim

    def field(self, t: float, y: np.ndarray) -> np.ndarray:
        """Flat phase-space field ``F(t, (x, v))``; no validation."""
        n = self.objective.dim
        x, v = y[:n], y[n:]
        dv = -(self.alpha / t) * v - self.objective._grad_x(x, self.schedule.mu(t))
        if self.perturbation is not None:
            dv = dv + self.perturbation(t)
        return np.concatenate((v, dv))

    def g(self, t: float) -> np.ndarray:
        if self.perturbation is None:
            return np.zeros(self.dim)
        return self.perturbation(t)


def rhs(spec: DynamicSpec, s: PhaseState):
    """``(dx, dv)`` at phase state ``s``."""
    if s.t < spec.t0:
        raise ValueError(f"t={s.t} precedes t0={spec.t0}")
    x = np.asarray(s.x, dtype=float)
    v = np.asarray(s.v, dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and math.isfinite(s.t)):
        raise FloatingPointError(f"non-finite phase state at t={s.t}")
    y = spec.field(float(s.t), np.concatenate((x, v)))
    n = spec.dim
    return y[:n], y[n:]


def lipschitz_bound(spec: DynamicSpec, t: float) -> float:
    """``M(t) = max(1 + alpha/t, ell + L/mu(t))``."""
    if t < spec.t0:
        raise ValueError(f"t={t} precedes t0={spec.t0}")
    f = spec.objective
    return max(1.0 + spec.alpha / t, f.lip_smooth + f.lip_nonsmooth / spec.schedule.mu(t))
