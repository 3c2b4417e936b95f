import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from smoothdyn.schedule import MU_MIN, MuSchedule, check_h1, integral_t_mu, mu, mu_dot

SCHEDULES = [
    MuSchedule.power_law(1.0, 3.0),
    MuSchedule.power_law(2.0, 2.5, t0=0.5),
    MuSchedule.power_law(1.0, 4.0),
    MuSchedule.exponential(1.0, 1.0),
    MuSchedule.exponential(3.0, 0.2, t0=2.0),
]


def test_values():
    s = MuSchedule.power_law(1.0, 3.0)
    assert mu(s, 1.0) == 1.0
    assert mu(s, 2.0) == pytest.approx(0.125)
    e = MuSchedule.exponential(2.0, 0.5)
    assert e.mu(4.0) == pytest.approx(2.0 * math.exp(-2.0))


def test_floor():
    s = MuSchedule.power_law(1.0, 3.0)
    t_floor = s.floor_time()
    assert t_floor == pytest.approx(1e4)
    assert s.mu(2e4) == MU_MIN
    assert s.mu_dot(2e4) == 0.0
    assert s.mu(0.5 * t_floor) > MU_MIN


def test_rejects_early_time_and_bad_parameters():
    s = MuSchedule.power_law(1.0, 3.0, t0=1.0)
    with pytest.raises(ValueError):
        s.mu(0.5)
    with pytest.raises(ValueError):
        MuSchedule.power_law(1.0, -1.0)
    with pytest.raises(ValueError):
        MuSchedule.exponential(0.0, 1.0)
    with pytest.raises(ValueError):
        MuSchedule("linear", 1.0, 1.0)


@pytest.mark.parametrize("s", SCHEDULES)
@pytest.mark.parametrize("t", [1.0, 2.5, 7.0, 30.0])
def test_mu_dot_finite_difference(s, t):
    t = max(t, s.t0 + 1e-3)
    h = 1e-6 * t
    fd = (s.mu(t + h) - s.mu(t - h)) / (2 * h)
    assert mu_dot(s, t) == pytest.approx(fd, rel=1e-6, abs=1e-14)


def test_h1_certificates():
    assert not check_h1(MuSchedule.power_law(1.0, 2.0)).certified
    assert not check_h1(MuSchedule.power_law(1.0, 1.5)).certified
    assert check_h1(MuSchedule.power_law(1.0, 2.0)).inv_t_certified
    assert check_h1(MuSchedule.power_law(1.0, 2.5)).certified
    assert check_h1(MuSchedule.power_law(1.0, 3.0)).certified
    assert check_h1(MuSchedule.exponential(1.0, 0.1)).certified
    assert "p=2" in check_h1(MuSchedule.power_law(1.0, 2.0)).reason


@pytest.mark.parametrize("s", SCHEDULES + [MuSchedule.power_law(1.0, 2.0), MuSchedule.power_law(1.0, 1.0)])
@pytest.mark.parametrize("b", [3.0, 10.0, 100.0])
def test_integral_matches_quadrature(s, b):
    a = s.t0
    ref, _ = quad(lambda t: t * s._raw(t), a, b, epsabs=0, epsrel=1e-13, limit=200)
    assert integral_t_mu(s, a, b) == pytest.approx(ref, rel=1e-8)


def test_integral_tail_and_errors():
    s = MuSchedule.power_law(1.0, 3.0)
    assert s.integral_t_mu(1.0, math.inf) == pytest.approx(1.0)
    assert MuSchedule.power_law(1.0, 2.0).integral_t_mu(1.0, math.inf) == math.inf
    with pytest.raises(ValueError):
        s.integral_t_mu(5.0, 2.0)
    with pytest.raises(ValueError):
        s.integral_t_mu(0.5, 2.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(1.0, 50.0), st.floats(0.0, 50.0), st.floats(0.0, 50.0), st.sampled_from(SCHEDULES))
def test_integral_additive(a, d1, d2, s):
    a = max(a, s.t0)
    b, c = a + d1, a + d1 + d2
    whole = s.integral_t_mu(a, c)
    parts = s.integral_t_mu(a, b) + s.integral_t_mu(b, c)
    assert whole == pytest.approx(parts, rel=1e-10, abs=1e-14)


def test_to_dict():
    assert MuSchedule.power_law(1.0, 3.0).to_dict() == {"kind": "power_law", "c": 1.0, "p": 3.0}
    assert MuSchedule.exponential(2.0, 0.5).to_dict() == {"kind": "exponential", "c": 2.0, "r": 0.5}
