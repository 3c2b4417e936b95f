"""Smoothing functions for nonsmooth convex objectives.

A :class:`SmoothedFunction` bundles a convex ``f`` with a smooth
approximation ``f~(x, mu)`` and the constants that certify it:

* ``kappa`` bounds ``|d f~ / d mu|``, hence ``|f~(x, mu) - f(x)| <= kappa * mu``;
* ``lip_nonsmooth`` (``L``) and ``lip_smooth`` (``ell``) bound the gradient
  Lipschitz constant of ``f~(., mu)`` by ``ell + L / mu``.

The combinators (:func:`combine_sum`, :func:`compose_affine`,
:func:`lift_separable`, :func:`wrap_smooth`) propagate these constants
exactly, and :func:`certify` checks them by sampling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "ScalarSmoothing",
    "SQRT_ABS",
    "LOGEXP_PLUS",
    "SmoothedFunction",
    "combine_sum",
    "compose_affine",
    "lift_separable",
    "wrap_smooth",
    "zero_function",
    "spectral_norm",
    "DomainSampler",
    "ConditionResult",
    "CertificationReport",
    "certify",
]


# ---------------------------------------------------------------------------
# scalar smoothings
# ---------------------------------------------------------------------------


def _sqrt_abs_value(s, mu):
    return np.hypot(s, mu)


def _sqrt_abs_grad(s, mu):
    return s / np.hypot(s, mu)


def _sqrt_abs_grad_mu(s, mu):
    return mu / np.hypot(s, mu)


def _logexp_value(s, mu):
    # mu * log(1 + exp(s / mu)), overflow-free
    return mu * np.logaddexp(0.0, s / mu)


def _logexp_grad(s, mu):
    return expit(s / mu)


def _logexp_grad_mu(s, mu):
    # log(1 + e^z) - z * sigmoid(z) is even in z; this form has no cancellation
    a = np.abs(s / mu)
    return np.log1p(np.exp(-a)) + a * expit(-a)


@dataclass(frozen=True)
class ScalarSmoothing:
    """A smoothing ``phi(s, mu)`` of a scalar convex function.

    ``kappa_scalar`` bounds ``|d phi / d mu|`` and ``lip_scalar / mu`` bounds
    ``phi''``. All callables are vectorized over ``s``.
    """

    kind: str
    kappa_scalar: float
    lip_scalar: float
    value: Callable = field(repr=False, compare=False)
    grad: Callable = field(repr=False, compare=False)
    grad_mu: Callable = field(repr=False, compare=False)
    underlying: Callable = field(repr=False, compare=False)


SQRT_ABS = ScalarSmoothing(
    kind="sqrt_abs",
    kappa_scalar=1.0,
    lip_scalar=1.0,
    value=_sqrt_abs_value,
    grad=_sqrt_abs_grad,
    grad_mu=_sqrt_abs_grad_mu,
    underlying=np.abs,
)

LOGEXP_PLUS = ScalarSmoothing(
    kind="logexp_plus",
    kappa_scalar=math.log(2.0),
    lip_scalar=0.25,
    value=_logexp_value,
    grad=_logexp_grad,
    grad_mu=_logexp_grad_mu,
    underlying=lambda s: np.maximum(s, 0.0),
)

SCALAR_SMOOTHINGS = {s.kind: s for s in (SQRT_ABS, LOGEXP_PLUS)}


# ---------------------------------------------------------------------------
# vector-valued smoothing functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothedFunction:
    """Convex ``f`` on R^dim together with a certified smoothing ``f~``.

    The raw callables ``_value``, ``_grad_x``, ``_grad_mu`` and
    ``_underlying`` take ``(x, mu)`` / ``(x,)`` without any validation; the
    public methods check shapes and ``mu > 0`` first. Hot loops (the ODE
    right-hand side) go straight to the raw callables.
    """

    dim: int
    kappa: float
    lip_nonsmooth: float
    lip_smooth: float
    _value: Callable = field(repr=False, compare=False)
    _grad_x: Callable = field(repr=False, compare=False)
    _grad_mu: Callable = field(repr=False, compare=False)
    _underlying: Callable = field(repr=False, compare=False)
    label: str = "f"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        for name in ("kappa", "lip_nonsmooth", "lip_smooth"):
            val = getattr(self, name)
            if not (val >= 0.0 and math.isfinite(val)):
                raise ValueError(f"{name} must be finite and nonnegative, got {val!r}")

    def _check_x(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return x

    @staticmethod
    def _check_mu(mu):
        mu = float(mu)
        if not mu > 0.0:
            raise ValueError(f"smoothing parameter must be positive, got {mu!r}")
        return mu

    def value(self, x, mu) -> float:
        """Smoothed value ``f~(x, mu)``."""
        return float(self._value(self._check_x(x), self._check_mu(mu)))

    def underlying(self, x) -> float:
        """The original nonsmooth ``f(x)``; never used by the dynamic."""
        return float(self._underlying(self._check_x(x)))

    def grad_x(self, x, mu) -> np.ndarray:
        """Gradient of ``f~(., mu)`` at ``x``."""
        return np.asarray(self._grad_x(self._check_x(x), self._check_mu(mu)), dtype=float)

    def grad_mu(self, x, mu) -> float:
        """Partial derivative of ``f~`` with respect to ``mu``."""
        return float(self._grad_mu(self._check_x(x), self._check_mu(mu)))

    def lipschitz(self, mu) -> float:
        """Gradient Lipschitz bound ``ell + L / mu`` at smoothing level ``mu``."""
        return self.lip_smooth + self.lip_nonsmooth / self._check_mu(mu)

    def constants(self) -> dict:
        return {
            "dim": self.dim,
            "kappa": self.kappa,
            "lip_nonsmooth": self.lip_nonsmooth,
            "lip_smooth": self.lip_smooth,
        }


def value(f: SmoothedFunction, x, mu) -> float:
    return f.value(x, mu)


def underlying(f: SmoothedFunction, x) -> float:
    return f.underlying(x)


def grad_x(f: SmoothedFunction, x, mu) -> np.ndarray:
    return f.grad_x(x, mu)


def grad_mu(f: SmoothedFunction, x, mu) -> float:
    return f.grad_mu(x, mu)


# ---------------------------------------------------------------------------
# combinators
# ---------------------------------------------------------------------------


def zero_function(dim: int) -> SmoothedFunction:
    """The identically-zero function; neutral element of :func:`combine_sum`."""
    return wrap_smooth(
        lambda x: 0.0, lambda x: np.zeros_like(x), ell=0.0, dim=dim, label="0"
    )


def wrap_smooth(fun, grad, ell: float, dim: int, label: str = "smooth") -> SmoothedFunction:
    """Wrap an already-smooth convex function; ``ell`` is its gradient Lipschitz constant.

    The smoothing parameter is ignored: ``f~(x, mu) = f(x)``, ``kappa = 0``,
    ``L = 0``.
    """
    ell = float(ell)
    if ell < 0.0:
        raise ValueError(f"ell must be nonnegative, got {ell}")
    return SmoothedFunction(
        dim=dim,
        kappa=0.0,
        lip_nonsmooth=0.0,
        lip_smooth=ell,
        _value=lambda x, mu: fun(x),
        _grad_x=lambda x, mu: grad(x),
        _grad_mu=lambda x, mu: 0.0,
        _underlying=fun,
        label=label,
    )


def combine_sum(a: SmoothedFunction, b: SmoothedFunction) -> SmoothedFunction:
    """Pointwise sum; all three constants add."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    av, ag, am, au = a._value, a._grad_x, a._grad_mu, a._underlying
    bv, bg, bm, bu = b._value, b._grad_x, b._grad_mu, b._underlying
    return SmoothedFunction(
        dim=a.dim,
        kappa=a.kappa + b.kappa,
        lip_nonsmooth=a.lip_nonsmooth + b.lip_nonsmooth,
        lip_smooth=a.lip_smooth + b.lip_smooth,
        _value=lambda x, mu: av(x, mu) + bv(x, mu),
        _grad_x=lambda x, mu: ag(x, mu) + bg(x, mu),
        _grad_mu=lambda x, mu: am(x, mu) + bm(x, mu),
        _underlying=lambda x: au(x) + bu(x),
        label=f"{a.label} + {b.label}",
    )


def spectral_norm(A, rtol: float = 1e-8, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    Stops once successive estimates agree to ``rtol`` (relative).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("expected a matrix")
    if not np.any(A):
        return 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # start vector in the null space; restart along a fresh direction
            v = rng.standard_normal(A.shape[1])
            v /= np.linalg.norm(v)
            continue
        sigma_new = math.sqrt(nw)
        v = w / nw
        if abs(sigma_new - sigma) <= rtol * sigma_new:
            return float(np.linalg.norm(A @ v))
        sigma = sigma_new
    return float(np.linalg.norm(A @ v))


def compose_affine(f: SmoothedFunction, A, b=None, sigma_max: Optional[float] = None) -> SmoothedFunction:
    """``x -> f(A x - b)``.

    ``kappa`` is unchanged; both Lipschitz constants pick up a factor
    ``sigma_max(A)**2`` (computed once by :func:`spectral_norm` unless given).
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != f.dim:
        raise ValueError(f"A must have shape ({f.dim}, n), got {A.shape}")
    b = np.zeros(A.shape[0]) if b is None else np.array(b, dtype=float)
    if b.shape != (A.shape[0],):
        raise ValueError(f"b must have shape ({A.shape[0]},), got {b.shape}")
    if sigma_max is None:
        sigma_max = spectral_norm(A)
    s2 = float(sigma_max) ** 2
    AT = A.T.copy()
    fv, fg, fm, fu = f._value, f._grad_x, f._grad_mu, f._underlying
    A.setflags(write=False)
    b.setflags(write=False)
    out = SmoothedFunction(
        dim=A.shape[1],
        kappa=f.kappa,
        lip_nonsmooth=f.lip_nonsmooth * s2,
        lip_smooth=f.lip_smooth * s2,
        _value=lambda x, mu: fv(A @ x - b, mu),
        _grad_x=lambda x, mu: AT @ fg(A @ x - b, mu),
        _grad_mu=lambda x, mu: fm(A @ x - b, mu),
        _underlying=lambda x: fu(A @ x - b),
        label=f"{f.label}(Ax-b)",
    )
    object.__setattr__(out, "sigma_max", float(sigma_max))
    return out


def lift_separable(s: ScalarSmoothing, m: int) -> SmoothedFunction:
    """``y -> sum_i phi(y_i, mu)`` on R^m.

    ``kappa`` adds over coordinates, but the Hessian is diagonal, so the
    Lipschitz constant stays at the scalar one.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    val, grad, gmu, und = s.value, s.grad, s.grad_mu, s.underlying
    return SmoothedFunction(
        dim=int(m),
        kappa=m * s.kappa_scalar,
        lip_nonsmooth=s.lip_scalar,
        lip_smooth=0.0,
        _value=lambda y, mu: np.sum(val(y, mu)),
        _grad_x=lambda y, mu: grad(y, mu),
        _grad_mu=lambda y, mu: np.sum(gmu(y, mu)),
        _underlying=lambda y: np.sum(und(y)),
        label=f"sum {s.kind}",
    )


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSampler:
    """Where and how densely :func:`certify` samples.

    Points are uniform in the box ``center + [lo, hi]^dim``.
    """

    box: tuple = (-10.0, 10.0)
    count: int = 1000
    mu_grid: Sequence[float] = (1.0, 0.1, 0.01)
    seed: int = 0
    center: Optional[Sequence[float]] = None


@dataclass
class ConditionResult:
    condition: str
    max_observed: float
    bound: float
    passed: bool

    def to_dict(self):
        return {
            "condition": self.condition,
            "max_observed": self.max_observed,
            "bound": self.bound,
            "pass": self.passed,
        }


@dataclass
class CertificationReport:
    label: str
    constants: dict
    conditions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name) -> ConditionResult:
        for c in self.conditions:
            if c.condition == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "label": self.label,
            "constants": self.constants,
            "pass": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def table(self) -> str:
        lines = [f"{self.label}  (kappa={self.constants['kappa']:.6g}, "
                 f"L={self.constants['lip_nonsmooth']:.6g}, ell={self.constants['lip_smooth']:.6g})"]
        for c in self.conditions:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"  {c.condition:<16} max={c.max_observed:<12.4e} bound={c.bound:<12.4e} {mark}")
        return "\n".join(lines)


# rounding slack on inequalities that hold exactly
_ABS_TOL = 1e-12
# relative tolerance on finite-difference agreement
_FD_TOL = 1e-5


def certify(f: SmoothedFunction, sampler: DomainSampler = DomainSampler(), label: str = None) -> CertificationReport:
    """Check the smoothing-function conditions on random samples.

    For every ``mu`` in the grid and every sampled pair ``(x, y)``:

    * sandwich ``|f~(x,mu) - f(x)| <= kappa mu`` (reported as the ratio / mu);
    * ``|d f~ / d mu| <= kappa``;
    * ``|f~(x,mu1) - f~(x,mu2)| <= kappa |mu1 - mu2|`` across the grid;
    * ``||grad f~(x) - grad f~(y)|| / ||x - y|| <= ell + L / mu``;
    * midpoint convexity, up to ``1e-12``;
    * directional central differences vs ``grad_x`` and ``grad_mu``
      (error relative to ``1 + |derivative|``).

    The largest violation-normalised quantity per condition is reported.
    """
    if sampler.count < 1 or len(sampler.mu_grid) == 0:
        raise ValueError("sampler must have a positive count and a nonempty mu grid")
    rng = np.random.Generator(np.random.Philox(sampler.seed))
    lo, hi = sampler.box
    center = np.zeros(f.dim) if sampler.center is None else np.asarray(sampler.center, float)
    X = center + rng.uniform(lo, hi, size=(sampler.count, f.dim))
    Y = center + rng.uniform(lo, hi, size=(sampler.count, f.dim))
    D = rng.standard_normal((sampler.count, f.dim))
    D /= np.linalg.norm(D, axis=1, keepdims=True)
    mus = [float(m) for m in sampler.mu_grid]

    sandwich = gmu_max = lip_ratio = cvx = fd_x = fd_mu = mu_lip = 0.0
    sandwich_viol = mu_lip_viol = 0.0
    lip_ok = True
    fval, fgrad, fmu, fund = f._value, f._grad_x, f._grad_mu, f._underlying
    for x, y, d in zip(X, Y, D):
        fx = fund(x)
        vals = []
        for mu in mus:
            vx = fval(x, mu)
            vals.append(vx)
            gap = abs(vx - fx)
            sandwich = max(sandwich, gap / mu)
            sandwich_viol = max(sandwich_viol, gap - f.kappa * mu)

            gm = fmu(x, mu)
            gmu_max = max(gmu_max, abs(gm))

            gx, gy = fgrad(x, mu), fgrad(y, mu)
            ratio = np.linalg.norm(gx - gy) / np.linalg.norm(x - y)
            bound = f.lip_smooth + f.lip_nonsmooth / mu
            lip_ratio = max(lip_ratio, ratio / bound if bound > 0 else ratio)
            if ratio > bound * (1 + 1e-12) + _ABS_TOL:
                lip_ok = False

            mid = fval(0.5 * (x + y), mu)
            cvx = max(cvx, mid - 0.5 * (vx + fval(y, mu)))

            h = 1e-6 * (1.0 + np.linalg.norm(x))
            fd = (fval(x + h * d, mu) - fval(x - h * d, mu)) / (2 * h)
            dd = float(gx @ d)
            fd_x = max(fd_x, abs(fd - dd) / (1.0 + abs(dd)))

            # wider than the x step: f~ can be large while its mu-dependence is O(kappa mu)
            hm = 1e-4 * mu
            fdm = (fval(x, mu + hm) - fval(x, mu - hm)) / (2 * hm)
            fd_mu = max(fd_mu, abs(fdm - gm) / (1.0 + abs(gm)))
        for i in range(len(mus)):
            for j in range(i + 1, len(mus)):
                dm = abs(mus[i] - mus[j])
                diff = abs(vals[i] - vals[j])
                mu_lip = max(mu_lip, diff / dm)
                mu_lip_viol = max(mu_lip_viol, diff - f.kappa * dm)

    k = f.kappa
    conditions = [
        ConditionResult("sandwich", sandwich, k, sandwich_viol <= _ABS_TOL),
        ConditionResult("grad_mu_bound", gmu_max, k, gmu_max <= k + _ABS_TOL),
        ConditionResult("mu_lipschitz", mu_lip, k, mu_lip_viol <= _ABS_TOL),
        # reported as a fraction of the bound ell + L/mu
        ConditionResult("grad_lipschitz", lip_ratio, 1.0, lip_ok),
        ConditionResult("convexity", cvx, _ABS_TOL, cvx <= _ABS_TOL),
        ConditionResult("fd_grad_x", fd_x, _FD_TOL, fd_x <= _FD_TOL),
        ConditionResult("fd_grad_mu", fd_mu, _FD_TOL, fd_mu <= _FD_TOL),
    ]
    return CertificationReport(label or f.label, f.constants(), conditions)
