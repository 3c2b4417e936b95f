import numpy as np
import pytest

from smoothdyn import diagnostics as dg
from smoothdyn.integrator import IntegratorConfig, Trajectory, integrate
from smoothdyn.problems import preset


def _synthetic(t, gap, f_star=0.0):
    n = len(t)
    z = np.zeros((n, 1))
    return Trajectory(t=np.asarray(t, float), x=z, v=z.copy(), f_raw=f_star + np.asarray(gap, float),
                      f_smooth=np.zeros(n), grad_norm=np.zeros(n), step_size=np.zeros(n))


def test_fit_rate_recovers_exponent():
    t = np.linspace(1, 100, 500)
    assert dg.fit_rate(_synthetic(t, 3.0 * t**-2.0), 0.0, (10, 100)) == pytest.approx(-2.0, abs=1e-12)
    assert dg.fit_rate((t, 0.75 + t**-3.5), 0.75, (10, 100)) == pytest.approx(-3.5, abs=1e-9)


def test_fit_rate_needs_ten_samples():
    t = np.linspace(1, 100, 500)
    with pytest.raises(ValueError, match="at least 10"):
        dg.fit_rate(_synthetic(t, t**-2.0), 0.0, (50, 50.5))
    # gaps at the floor are dropped
    with pytest.raises(ValueError):
        dg.fit_rate(_synthetic(t, np.full_like(t, 1e-17)), 0.0, (10, 100))


def test_decay_ratio():
    t = np.linspace(1, 100, 1000)
    assert dg.decay_ratio(_synthetic(t, t**-2.0), 0.0) == pytest.approx(1.0)
    assert dg.decay_ratio(_synthetic(t, t**-3.0), 0.0) == pytest.approx(0.25, rel=1e-3)
    with pytest.raises(ValueError):
        dg.decay_ratio(_synthetic(np.linspace(10, 20, 50), np.ones(50)), 0.0)


def test_w_monotone_check():
    assert dg.check_W_monotone([3.0, 2.0, 2.0 + 1e-7, 1.0]).passed
    v = dg.check_W_monotone([3.0, 2.0, 2.1, 1.0])
    assert not v.passed and v.max_violation == pytest.approx(0.1)


def test_plateau_check():
    t = np.linspace(1, 100, 991)
    assert dg.check_plateau(t, 1 - 1 / t, "conv").passed
    # log t still plateaus by this measure (2.3%); linear growth does not
    assert dg.check_plateau(t, np.log(t), "log").passed
    assert not dg.check_plateau(t, t, "div").passed


def test_anchor_and_velocity_checks():
    t = np.linspace(1, 100, 991)
    assert dg.check_anchor_stabilizes(t, 1 + np.exp(-t)).passed
    assert not dg.check_anchor_stabilizes(t, 1 + np.sin(t)).passed


@pytest.fixture(scope="module")
def short_ex1():
    prob, spec, _ = preset("ex1")
    traj = integrate(spec, IntegratorConfig(t_end=20.0), [3.0, -4.0])
    return prob, spec, traj


def test_energies_pointwise_match_table(short_ex1):
    prob, spec, traj = short_ex1
    z = prob.project(traj.x[-1])
    table = dg.energy_table(traj, spec, x_star=z, f_star=prob.f_star, z=z)
    for k in (0, 57, len(traj) - 1):
        s = traj[k]
        assert table["W"][k] == pytest.approx(dg.energy_W(spec, s), rel=1e-14)
        assert table["E"][k] == pytest.approx(dg.energy_E(spec, s, z), rel=1e-12, abs=1e-14)
        assert table["calE"][k] == pytest.approx(dg.energy_calE(spec, s, z), rel=1e-12, abs=1e-14)
        assert table["h_anchor"][k] == pytest.approx(dg.h_anchor(s, z))
    recs = list(dg.records(table))
    assert len(recs) == len(traj) and recs[0].t == 1.0


def test_energy_inequalities_short_run(short_ex1):
    prob, spec, traj = short_ex1
    z = prob.project(traj.x[-1])
    table = dg.energy_table(traj, spec, x_star=z, f_star=prob.f_star, z=z)
    assert dg.check_W_monotone(table["W"]).passed
    assert dg.check_nonnegative(table["E"], "E").passed
    assert dg.check_quasi_descent(traj, spec, z).passed


def test_quasi_descent_detects_energy_injection(short_ex1):
    prob, spec, traj = short_ex1
    z = prob.project(traj.x[-1])
    calE = dg.energy_table(traj, spec, x_star=z)["calE"].copy()
    calE[len(calE) // 2:] += 1.0
    assert not dg.check_quasi_descent(traj, spec, z, calE=calE).passed


def test_perturbed_energy():
    prob, spec, _ = preset("ex1_perturbed")
    traj = integrate(spec, IntegratorConfig(t_end=15.0), [2.0, 2.0])
    Wg = dg.perturbed_energy_series(spec, traj, prob.f_star)
    assert dg.check_W_monotone(Wg).passed
    # the tail work vanishes at T
    s = traj[len(traj) - 1]
    m = spec.schedule.mu(s.t)
    expected = 0.5 * s.v @ s.v + spec.objective.value(s.x, m) - 0.75 + spec.objective.kappa * m
    assert dg.perturbed_energy_Wg(spec, traj, s, 0.75) == pytest.approx(expected)
    _, spec0, _ = preset("ex1")
    with pytest.raises(ValueError):
        dg.perturbed_energy_series(spec0, traj, 0.75)
