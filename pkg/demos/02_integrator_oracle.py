"""
Adaptive Runge-Kutta on a problem with a closed form
====================================================

For f(x) = x^2/2 and alpha = 3 the dynamic is x'' + (3/t) x' + x = 0, whose
solution is x(t) = J1(t)/t. We integrate it, compare with the Bessel
function, and watch the error follow the tolerance.
"""

import numpy as np
from scipy.special import j0, j1

from smoothdyn import DynamicSpec, IntegratorConfig, MuSchedule, integrate, interpolate, wrap_smooth

f = wrap_smooth(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), ell=1.0, dim=1)
spec = DynamicSpec(alpha=3.0, t0=1.0, objective=f, schedule=MuSchedule.power_law(1.0, 3.0))
x0, v0 = j1(1.0), j0(1.0) - 2 * j1(1.0)

for rtol in (1e-6, 1e-8, 1e-10):
    traj = integrate(spec, IntegratorConfig(t_end=50.0, rtol=rtol, atol=rtol / 100), [x0], [v0])
    err = np.max(np.abs(traj.x[:, 0] - j1(traj.t) / traj.t))
    print(f"rtol={rtol:.0e}  steps={traj.metadata['n_steps']:5d}  max error={err:.2e}")

# off-grid values come from the method's continuous extension
traj = integrate(spec, IntegratorConfig(t_end=50.0, dense=True), [x0], [v0])
t = 17.333
print("x(17.333) =", interpolate(traj, t).x[0], " exact", j1(t) / t)
