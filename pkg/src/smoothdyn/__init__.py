"""Smoothed inertial second-order dynamics for nonsmooth convex minimization.

Integrates ``x'' + (alpha/t) x' + grad_x f~(x, mu(t)) = g(t)`` where ``f~`` is
a smoothing of a nonsmooth convex ``f`` and ``mu(t) -> 0``, and checks the
Lyapunov energy inequalities and ``O(1/t^2)`` rates along the result.
"""

from .diagnostics import Verdict, decay_ratio, energy_table, fit_rate
from .dynamics import DynamicSpec, Perturbation, PhaseState
from .integrator import IntegratorConfig, Trajectory, integrate, interpolate
from .problems import ProblemInstance, build_example1, build_random_l2l1, preset
from .schedule import MU_MIN, MuSchedule
from .smoothing import (
    LOGEXP_PLUS,
    SQRT_ABS,
    DomainSampler,
    SmoothedFunction,
    certify,
    combine_sum,
    compose_affine,
    lift_separable,
    wrap_smooth,
)

__version__ = "0.1.0"

__all__ = [
    "Verdict", "decay_ratio", "energy_table", "fit_rate",
    "DynamicSpec", "Perturbation", "PhaseState",
    "IntegratorConfig", "Trajectory", "integrate", "interpolate",
    "ProblemInstance", "build_example1", "build_random_l2l1", "preset",
    "MU_MIN", "MuSchedule",
    "LOGEXP_PLUS", "SQRT_ABS", "DomainSampler", "SmoothedFunction", "certify",
    "combine_sum", "compose_affine", "lift_separable", "wrap_smooth",
]
