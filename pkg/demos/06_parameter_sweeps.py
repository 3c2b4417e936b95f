"""
Effect of the damping alpha and of the smoothing decay
======================================================

On the 20x10 / 50x10 instance from one initial point, the gap reached at
T = 20 shrinks sharply as alpha grows. The exponent p of mu(t) = t^-p
matters much less: the gap still oscillates at this horizon, so p = 3 and
p = 4 can swap order depending on the stopping time.
"""

from smoothdyn import MuSchedule, integrate, preset
from smoothdyn.problems import uniform

T = 20.0
x0 = None
for alpha in (3.1, 4.0, 7.0):
    problem, spec, config = preset("ex2", alpha=alpha, t_end=T)
    x0 = -5 + 10 * uniform(0, problem.dim, stream=1) if x0 is None else x0
    print(f"alpha={alpha:<4} final gap {integrate(spec, config, x0).f_raw[-1]:.3e}")
for p in (2.5, 3.0, 4.0):
    problem, spec, config = preset("ex2", alpha=4.0, schedule=MuSchedule.power_law(1.0, p), t_end=T)
    print(f"p={p:<4} final gap {integrate(spec, config, x0).f_raw[-1]:.3e}")
