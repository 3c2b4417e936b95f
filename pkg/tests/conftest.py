import numpy as np
import pytest
from scipy.special import j0, j1

from smoothdyn.dynamics import DynamicSpec
from smoothdyn.schedule import MuSchedule
from smoothdyn.smoothing import wrap_smooth


def bessel_solution(t):
    """``x(t) = J1(t)/t`` solves ``x'' + (3/t) x' + x = 0``."""
    t = np.asarray(t, dtype=float)
    x = j1(t) / t
    v = (j0(t) - 2.0 * j1(t) / t) / t
    return x, v


@pytest.fixture
def quadratic_spec():
    """``alpha = 3`` dynamic on ``f(x) = x^2/2`` in one dimension."""
    f = wrap_smooth(lambda x: 0.5 * float(x @ x), lambda x: x.copy(), ell=1.0, dim=1, label="x^2/2")
    return DynamicSpec(alpha=3.0, t0=1.0, objective=f, schedule=MuSchedule.power_law(1.0, 3.0))


def pytest_terminal_summary(terminalreporter):
    """Print the ``acceptance`` user property of every test, one line each."""
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) == "call":
                lines += [v for k, v in rep.user_properties if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
