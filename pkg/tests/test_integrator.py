import numpy as np
import pytest

from conftest import bessel_solution
from smoothdyn.dynamics import DynamicSpec
from smoothdyn.integrator import IntegratorConfig, Trajectory, integrate, interpolate
from smoothdyn.problems import preset


def _bessel_run(spec, **kw):
    x0, v0 = bessel_solution(1.0)
    return integrate(spec, IntegratorConfig(t_end=50.0, **kw), [x0], [v0])


def _max_error(traj):
    x, v = bessel_solution(traj.t)
    return float(np.max(np.abs(traj.x[:, 0] - x)))


def test_closed_form_oracle(quadratic_spec):
    traj = _bessel_run(quadratic_spec)
    assert traj.t[0] == 1.0 and traj.t[-1] == 50.0
    assert _max_error(traj) <= 1e-6
    _, v = bessel_solution(traj.t)
    assert np.max(np.abs(traj.v[:, 0] - v)) <= 1e-6


def test_error_shrinks_with_tolerance(quadratic_spec):
    e1 = _max_error(_bessel_run(quadratic_spec))
    e2 = _max_error(_bessel_run(quadratic_spec, rtol=0.5e-8, atol=0.5e-10))
    assert e1 / e2 >= 2.0


def test_record_grid_and_metadata(quadratic_spec):
    traj = integrate(quadratic_spec, IntegratorConfig(t_end=5.05, record_every=0.5), [1.0])
    np.testing.assert_allclose(traj.t, list(np.arange(1.0, 5.01, 0.5)) + [5.05])
    md = traj.metadata
    assert md["spec"]["alpha"] == 3.0
    assert md["config"]["t_end"] == 5.05
    assert md["n_steps"] > 0 and not traj.truncated
    assert md["v0"] == [0.0]


def test_dense_and_hermite_interpolation(quadratic_spec):
    x0, v0 = bessel_solution(1.0)
    cfg = IntegratorConfig(t_end=20.0, record_every=0.5)
    for dense in (False, True):
        traj = integrate(quadratic_spec, IntegratorConfig(**{**cfg.to_dict(), "dense": dense}), [x0], [v0])
        for t in (1.23, 7.77, 19.9):
            s = interpolate(traj, t)
            x, v = bessel_solution(t)
            assert abs(s.x[0] - x) < 1e-6
            assert abs(s.v[0] - v) < 1e-5
    with pytest.raises(ValueError):
        interpolate(traj, 25.0)


def test_truncation_on_step_underflow():
    _, spec, _ = preset("ex2", seed=1)
    cfg = IntegratorConfig(t_end=5.0, h_min=1e-3, h_init=1e-3)
    traj = integrate(spec, cfg, np.zeros(spec.dim))
    assert traj.truncated
    assert any("stiffness budget exceeded" in e for e in traj.events)
    assert traj.t[-1] < 5.0


def test_invalid_inputs(quadratic_spec):
    with pytest.raises(ValueError):
        integrate(quadratic_spec, IntegratorConfig(t_end=0.5), [1.0])
    with pytest.raises(ValueError):
        integrate(quadratic_spec, IntegratorConfig(t_end=2.0), [1.0, 2.0])
    with pytest.raises(FloatingPointError):
        integrate(quadratic_spec, IntegratorConfig(t_end=2.0), [np.inf])
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=2.0, h_min=1.0, h_init=0.1)
    with pytest.raises(ValueError):
        IntegratorConfig(t_end=2.0, rtol=0.0)


def test_csv_round_trip(tmp_path):
    _, spec, _ = preset("ex1")
    traj = integrate(spec, IntegratorConfig(t_end=4.0), [1.0, -2.0])
    path = tmp_path / "traj.csv"
    traj.to_csv(path)
    back = Trajectory.from_csv(path)
    for name in ("t", "x", "v", "f_raw", "f_smooth", "grad_norm", "step_size"):
        np.testing.assert_array_equal(getattr(back, name), getattr(traj, name))


@pytest.mark.parametrize("body", ["", "a,b\n1,2\n", "t,x_0,v_0,f_raw,f_smooth,grad_norm,step_size\n1,2,3,4,5,6,abc\n",
                                  "t,x_0,v_0,f_raw,f_smooth,grad_norm,step_size\n1,2,3\n"])
def test_csv_rejects_malformed(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(ValueError):
        Trajectory.from_csv(path)


def test_deterministic():
    _, spec, _ = preset("ex1")
    cfg = IntegratorConfig(t_end=6.0)
    a = integrate(spec, cfg, [3.0, 1.0])
    b = integrate(spec, cfg, [3.0, 1.0])
    np.testing.assert_array_equal(a.x, b.x)
