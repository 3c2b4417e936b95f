"""Benchmark problems with known optimal values.

* ``ex1``: ``(x1 + x2 - 1)^2 + |x1| + max(x2, 0)`` on R^2, optimal value 3/4
  on the segment ``{x1 + x2 = 1/2, x1 >= 0, x2 >= 0}``.
* ``ex2`` / ``ex3``: ``||A x - b||^2 + ||D x - d||_1`` with Gaussian ``A``,
  ``D``, ``x*`` and ``b = A x*``, ``d = D x*``, so the optimal value is 0.

Random data come from :func:`standard_normal`: Philox4x64 keyed by the seed
(counter starting at zero), 53-bit uniforms, Box-Muller pairs. The stream is
fully specified, so instances are identical across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dynamics import DynamicSpec, Perturbation
from .integrator import IntegratorConfig
from .schedule import MuSchedule
from .smoothing import (
    LOGEXP_PLUS,
    SQRT_ABS,
    SmoothedFunction,
    combine_sum,
    compose_affine,
    lift_separable,
    spectral_norm,
    wrap_smooth,
)

__all__ = [
    "ProblemInstance",
    "uniform",
    "standard_normal",
    "build_example1",
    "build_random_l2l1",
    "preset",
    "PRESETS",
    "segment_projection",
]

_TWO_M53 = 2.0**-53


def uniform(seed: int, size: int, stream: int = 0) -> np.ndarray:
    """``size`` uniforms in ``(0, 1)`` from Philox4x64 with key ``(seed, stream)``."""
    bg = np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64))
    raw = bg.random_raw(size)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def standard_normal(seed: int, size: int, stream: int = 0) -> np.ndarray:
    """Standard normals by the Box-Muller transform of :func:`uniform` pairs."""
    m = (size + 1) // 2
    u = uniform(seed, 2 * m, stream)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    theta = 2.0 * math.pi * u[1::2]
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:size]


@dataclass(frozen=True)
class ProblemInstance:
    objective: SmoothedFunction
    f_star: float
    x_star: np.ndarray
    dist_to_opt: Callable = field(repr=False, compare=False)
    provenance: dict = field(default_factory=dict)
    # maps a point to its nearest optimal point
    project: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.objective.dim

    def gap(self, x) -> float:
        return self.objective.underlying(x) - self.f_star

    def to_json(self, **kw) -> str:
        return json.dumps(
            {"f_star": self.f_star, "x_star": np.asarray(self.x_star).tolist(),
             "constants": self.objective.constants(), **self.provenance},
            **kw,
        )


# -- example 1 ---------------------------------------------------------------

_SEG_A = np.array([0.5, 0.0])
_SEG_B = np.array([0.0, 0.5])


def segment_projection(x) -> np.ndarray:
    """Nearest point of the segment from (1/2, 0) to (0, 1/2)."""
    x = np.asarray(x, dtype=float)
    d = _SEG_B - _SEG_A
    s = float(np.clip((x - _SEG_A) @ d / (d @ d), 0.0, 1.0))
    return _SEG_A + s * d


def _segment_distance(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - segment_projection(x)))


def build_example1() -> ProblemInstance:
    quad = wrap_smooth(
        lambda x: (x[0] + x[1] - 1.0) ** 2,
        lambda x: np.full(2, 2.0 * (x[0] + x[1] - 1.0)),
        ell=4.0,  # Hessian 2*[[1,1],[1,1]]
        dim=2,
        label="(x1+x2-1)^2",
    )
    abs_x1 = compose_affine(lift_separable(SQRT_ABS, 1), [[1.0, 0.0]], [0.0], sigma_max=1.0)
    plus_x2 = compose_affine(lift_separable(LOGEXP_PLUS, 1), [[0.0, 1.0]], [0.0], sigma_max=1.0)
    obj = combine_sum(combine_sum(quad, abs_x1), plus_x2)
    object.__setattr__(obj, "label", "ex1: (x1+x2-1)^2 + |x1| + max(x2,0)")
    return ProblemInstance(
        objective=obj,
        f_star=0.75,
        x_star=np.array([0.25, 0.25]),
        dist_to_opt=_segment_distance,
        provenance={"example_id": "ex1", "seed": None, "dims": [2]},
        project=segment_projection,
    )


# -- examples 2 and 3 ----------------------------------------------------------


def build_random_l2l1(mA: int, mD: int, n: int, seed: int) -> ProblemInstance:
    """``||A x - b||^2 + ||D x - d||_1`` with ``b = A x*``, ``d = D x*``.

    ``A`` (row-major), then ``D``, then ``x*`` are drawn consecutively from one
    :func:`standard_normal` stream.
    """
    for name, val in (("mA", mA), ("mD", mD), ("n", n)):
        if int(val) != val or val < 1:
            raise ValueError(f"{name} must be a positive integer, got {val!r}")
    z = standard_normal(seed, mA * n + mD * n + n)
    A = z[: mA * n].reshape(mA, n)
    D = z[mA * n: mA * n + mD * n].reshape(mD, n)
    xs = z[mA * n + mD * n:].copy()
    b = A @ xs
    d = D @ xs
    sA = spectral_norm(A)
    sD = spectral_norm(D)
    AT = A.T.copy()

    def fun(x):
        r = A @ x - b
        return float(r @ r)

    quad = wrap_smooth(fun, lambda x: 2.0 * (AT @ (A @ x - b)), ell=2.0 * sA**2, dim=n,
                       label="||Ax-b||^2")
    l1 = compose_affine(lift_separable(SQRT_ABS, mD), D, d, sigma_max=sD)
    obj = combine_sum(quad, l1)
    object.__setattr__(obj, "label", f"||Ax-b||^2 + ||Dx-d||_1 ({mA}x{n}, {mD}x{n})")
    xs.setflags(write=False)
    # A has full column rank when mA >= n (almost surely), so x* is the unique minimizer
    return ProblemInstance(
        objective=obj,
        f_star=0.0,
        x_star=xs,
        dist_to_opt=lambda x: float(np.linalg.norm(np.asarray(x, float) - xs)),
        provenance={"example_id": None, "seed": int(seed), "dims": [mA, mD, n],
                    "sigma_max_A": sA, "sigma_max_D": sD},
        project=lambda x: xs.copy(),
    )


# -- presets -------------------------------------------------------------------

DEFAULT_SEED = 20240101

PRESETS = {
    "ex1": {"dims": None, "t_end": 100.0, "perturbed": False},
    "ex1_perturbed": {"dims": None, "t_end": 100.0, "perturbed": True},
    "ex2": {"dims": (20, 50, 10), "t_end": 60.0, "perturbed": False},
    "ex3": {"dims": (200, 500, 100), "t_end": 30.0, "perturbed": False},
}


def preset(example_id: str, alpha: float = 7.0, schedule: Optional[MuSchedule] = None,
           seed: int = DEFAULT_SEED, t_end: Optional[float] = None, **integrator_kw):
    """Problem, dynamic and integrator settings of a named experiment.

    All presets use ``alpha = 7``, ``mu(t) = 1/t^3`` and ``t0 = 1`` unless
    overridden. ``ex1_perturbed`` adds ``g(t) = 20 exp(-t) (1, 1)/sqrt(2)``.
    """
    if example_id not in PRESETS:
        raise ValueError(f"unknown example id {example_id!r}; expected one of {sorted(PRESETS)}")
    info = PRESETS[example_id]
    if info["dims"] is None:
        problem = build_example1()
    else:
        problem = build_random_l2l1(*info["dims"], seed=seed)
    problem.provenance["example_id"] = example_id
    t0 = 1.0 if schedule is None else schedule.t0
    schedule = schedule or MuSchedule.power_law(1.0, 3.0, t0)
    pert = Perturbation.along_ones(20.0, 1.0, problem.dim) if info["perturbed"] else None
    spec = DynamicSpec(alpha=float(alpha), t0=t0, objective=problem.objective,
                       schedule=schedule, perturbation=pert)
    config = IntegratorConfig(t_end=float(t_end or info["t_end"]), **integrator_kw)
    return problem, spec, config
