"""
A decaying perturbation does not spoil convergence
==================================================

Add g(t) = 20 exp(-t) (1, 1)/sqrt(2) to Example 1. The forcing is integrable
against t, so the gap still decays and the finite-horizon energy
W_g(t) = W(t) + int_t^T <v, g> stays nonincreasing.
"""

from smoothdyn import diagnostics as dg
from smoothdyn import integrate, preset

problem, spec, config = preset("ex1_perturbed")
print("int t |g(t)| dt from t0:", spec.perturbation.integral_t_norm(spec.t0))
for x0 in ([4.0, -3.0], [-5.0, 5.0]):
    traj = integrate(spec, config, x0)
    Wg = dg.perturbed_energy_series(spec, traj, problem.f_star)
    print(x0, f"gap(T)={traj.f_raw[-1] - 0.75:.2e}",
          f"dist={problem.dist_to_opt(traj.x[-1]):.1e}", dg.check_W_monotone(Wg, "Wg_monotone").to_dict())
