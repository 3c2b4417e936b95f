"""
Smoothing functions and their certificates
==========================================

A smoothing function replaces a nonsmooth convex f by a family f~(x, mu)
that is smooth in x, converges to f as mu -> 0 with |f~ - f| <= kappa mu,
and has a gradient Lipschitz constant ell + L/mu. This script builds the
two scalar smoothings, combines them, and certifies the result.
"""

import numpy as np

from smoothdyn import LOGEXP_PLUS, SQRT_ABS, DomainSampler, certify, combine_sum, compose_affine, lift_separable

# sqrt(s^2 + mu^2) smooths |s|; mu log(1 + exp(s/mu)) smooths max(s, 0)
s = np.linspace(-2, 2, 9)
for mu in (1.0, 0.1, 0.01):
    print(f"mu={mu:<5} |s| gap  {np.max(SQRT_ABS.value(s, mu) - np.abs(s)):.4f}"
          f"   max(s,0) gap {np.max(LOGEXP_PLUS.value(s, mu) - np.maximum(s, 0)):.4f}")

# ||D x - d||_1 on R^3: lift the scalar to 4 rows, then compose with an affine map
rng = np.random.default_rng(0)
D = rng.standard_normal((4, 3))
f = compose_affine(lift_separable(SQRT_ABS, 4), D, np.ones(4))
g = combine_sum(f, compose_affine(lift_separable(LOGEXP_PLUS, 1), np.array([[1.0, -1.0, 0.0]])))
print(g.constants())

# every condition is checked on random samples over a mu grid
report = certify(g, DomainSampler(count=500))
print(report.table())
print("all conditions hold:", report.passed)
