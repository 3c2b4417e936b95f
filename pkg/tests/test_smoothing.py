import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothdyn.smoothing import (
    LOGEXP_PLUS,
    SQRT_ABS,
    DomainSampler,
    SmoothedFunction,
    certify,
    combine_sum,
    compose_affine,
    grad_mu,
    grad_x,
    lift_separable,
    spectral_norm,
    value,
    wrap_smooth,
    zero_function,
)

finite = st.floats(-50, 50, allow_nan=False)
mus = st.floats(1e-4, 10.0)


def _sym_oracle(kind):
    """Value, d/ds and d/dmu of a scalar smoothing from sympy."""
    s, m = sp.symbols("s mu", real=True)
    expr = sp.sqrt(s**2 + m**2) if kind == "sqrt_abs" else m * sp.log(1 + sp.exp(s / m))
    return [sp.lambdify((s, m), e, "mpmath") for e in (expr, sp.diff(expr, s), sp.diff(expr, m))]


@pytest.mark.parametrize("kind,scalar", [("sqrt_abs", SQRT_ABS), ("logexp_plus", LOGEXP_PLUS)])
@pytest.mark.parametrize("s,mu", [(0.0, 1.0), (1.5, 0.3), (-2.0, 0.05), (7.0, 2.0), (-0.3, 1e-3)])
def test_scalar_matches_symbolic(kind, scalar, s, mu):
    v, ds, dm = _sym_oracle(kind)
    assert float(scalar.value(np.array(s), mu)) == pytest.approx(float(v(s, mu)), rel=1e-13, abs=1e-15)
    assert float(scalar.grad(np.array(s), mu)) == pytest.approx(float(ds(s, mu)), rel=1e-12, abs=1e-15)
    assert float(scalar.grad_mu(np.array(s), mu)) == pytest.approx(float(dm(s, mu)), rel=1e-12, abs=1e-15)


def test_reference_values():
    f = lift_separable(SQRT_ABS, 1)
    assert value(f, [0.0], 1.0) == pytest.approx(1.0)
    g = lift_separable(LOGEXP_PLUS, 1)
    assert value(g, [0.0], 1.0) == pytest.approx(math.log(2))
    # d/dmu [mu log(1 + e^{s/mu})] at s=0 is log 2
    assert grad_mu(g, [0.0], 1.0) == pytest.approx(math.log(2), rel=1e-14)
    assert grad_x(g, [0.0], 1.0)[0] == pytest.approx(0.5)


def test_logexp_large_arguments_stay_finite():
    g = lift_separable(LOGEXP_PLUS, 1)
    assert value(g, [800.0], 1e-3) == pytest.approx(800.0)
    assert value(g, [-800.0], 1e-3) == pytest.approx(0.0, abs=1e-300)
    assert np.isfinite(grad_mu(g, [800.0], 1e-3))


@settings(max_examples=200, deadline=None)
@given(finite, mus)
def test_sandwich_and_mu_derivative_bound(s, mu):
    for sc in (SQRT_ABS, LOGEXP_PLUS):
        f = lift_separable(sc, 1)
        assert abs(f.value([s], mu) - f.underlying([s])) <= sc.kappa_scalar * mu + 1e-12 * (1 + abs(s))
        assert abs(f.grad_mu([s], mu)) <= sc.kappa_scalar + 1e-12


@settings(max_examples=200, deadline=None)
@given(finite, mus, mus)
def test_mu_lipschitz(s, m1, m2):
    for sc in (SQRT_ABS, LOGEXP_PLUS):
        f = lift_separable(sc, 1)
        assert abs(f.value([s], m1) - f.value([s], m2)) <= sc.kappa_scalar * abs(m1 - m2) + 1e-11


@settings(max_examples=200, deadline=None)
@given(finite, finite, mus)
def test_midpoint_convexity(a, b, mu):
    for sc in (SQRT_ABS, LOGEXP_PLUS):
        f = lift_separable(sc, 1)
        mid = f.value([0.5 * (a + b)], mu)
        assert mid <= 0.5 * (f.value([a], mu) + f.value([b], mu)) + 1e-12 * (1 + abs(a) + abs(b))


def test_combinator_constants():
    f = lift_separable(SQRT_ABS, 5)
    assert (f.kappa, f.lip_nonsmooth, f.lip_smooth) == (5.0, 1.0, 0.0)
    q = wrap_smooth(lambda x: float(x @ x), lambda x: 2 * x, ell=2.0, dim=5)
    s = combine_sum(f, q)
    assert (s.kappa, s.lip_nonsmooth, s.lip_smooth) == (5.0, 1.0, 2.0)
    A = np.diag([3.0, 1.0, 0.5, 0.1, 2.0])
    c = compose_affine(s, A)
    assert c.kappa == 5.0
    assert c.lip_nonsmooth == pytest.approx(9.0)
    assert c.lip_smooth == pytest.approx(18.0)
    assert c.lipschitz(0.5) == pytest.approx(18.0 + 9.0 / 0.5)
    with pytest.raises(ValueError):
        combine_sum(f, zero_function(3))


def test_compose_affine_chain_rule():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 4))
    b = rng.standard_normal(6)
    f = compose_affine(lift_separable(SQRT_ABS, 6), A, b)
    x = rng.standard_normal(4)
    mu = 0.2
    r = A @ x - b
    expected = A.T @ (r / np.sqrt(r**2 + mu**2))
    np.testing.assert_allclose(f.grad_x(x, mu), expected, rtol=1e-13)
    assert f.underlying(x) == pytest.approx(np.abs(r).sum())


@pytest.mark.parametrize("shape", [(5, 3), (20, 10), (50, 10), (200, 100)])
def test_spectral_norm_matches_svd(shape):
    rng = np.random.default_rng(shape[0])
    A = rng.standard_normal(shape)
    assert spectral_norm(A) == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-7)
    assert spectral_norm(np.zeros(shape)) == 0.0


def test_input_validation():
    f = lift_separable(SQRT_ABS, 2)
    with pytest.raises(ValueError):
        f.value([1.0, 2.0], 0.0)
    with pytest.raises(ValueError):
        f.value([1.0, 2.0], -1.0)
    with pytest.raises(ValueError):
        f.grad_x([1.0, 2.0, 3.0], 1.0)
    with pytest.raises(ValueError):
        lift_separable(SQRT_ABS, 0)


def test_certify_passes_on_builtins():
    for sc in (SQRT_ABS, LOGEXP_PLUS):
        rep = certify(lift_separable(sc, 3), DomainSampler(count=300))
        assert rep.passed, rep.table()
        assert set(rep.to_dict()) >= {"label", "constants", "conditions"}


def test_certify_flags_wrong_kappa():
    good = lift_separable(SQRT_ABS, 1)
    bad = SmoothedFunction(
        dim=1, kappa=0.5, lip_nonsmooth=good.lip_nonsmooth, lip_smooth=0.0,
        _value=good._value, _grad_x=good._grad_x, _grad_mu=good._grad_mu,
        _underlying=good._underlying, label="wrong kappa",
    )
    rep = certify(bad, DomainSampler(count=200))
    assert not rep.passed
    assert not rep["sandwich"].passed
    assert not rep["grad_mu_bound"].passed
    assert rep["convexity"].passed


def test_certify_flags_wrong_gradient():
    good = lift_separable(SQRT_ABS, 2)
    bad = SmoothedFunction(
        dim=2, kappa=good.kappa, lip_nonsmooth=good.lip_nonsmooth, lip_smooth=0.0,
        _value=good._value, _grad_x=lambda x, mu: 1.01 * good._grad_x(x, mu),
        _grad_mu=good._grad_mu, _underlying=good._underlying,
    )
    assert not certify(bad, DomainSampler(count=100))["fd_grad_x"].passed
