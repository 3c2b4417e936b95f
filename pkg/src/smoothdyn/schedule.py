"""Smoothing-parameter schedules ``mu(t)``.

Two closed-form families are provided:

* ``power_law``:   ``mu(t) = c * t**(-p)``
* ``exponential``: ``mu(t) = c * exp(-r * t)``

Both admit closed-form integrability certificates for
``int_{t0}^inf t mu(t) dt``, which the rate results require.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

logger = logging.getLogger(__name__)

MU_MIN = 1e-12

KINDS = ("power_law", "exponential")


class H1Check(NamedTuple):
    certified: bool
    reason: str
    inv_t_certified: bool
    inv_t_reason: str


@dataclass(frozen=True)
class MuSchedule:
    """A positive, decreasing smoothing curve starting at ``t0``.

    ``rate`` is the exponent ``p`` for ``power_law`` and the decay rate ``r``
    for ``exponential``.
    """

    kind: str
    c: float
    rate: float
    t0: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")

    @classmethod
    def power_law(cls, c: float = 1.0, p: float = 3.0, t0: float = 1.0) -> "MuSchedule":
        return cls("power_law", float(c), float(p), float(t0))

    @classmethod
    def exponential(cls, c: float = 1.0, r: float = 1.0, t0: float = 1.0) -> "MuSchedule":
        return cls("exponential", float(c), float(r), float(t0))

    def _check_t(self, t):
        if t < self.t0:
            raise ValueError(f"t={t} precedes the schedule start t0={self.t0}")

    def _raw(self, t):
        if self.kind == "power_law":
            return self.c * t ** (-self.rate)
        return self.c * math.exp(-self.rate * t)

    def mu(self, t: float) -> float:
        """``mu(t)``, floored at ``MU_MIN``."""
        self._check_t(t)
        m = self._raw(t)
        if m < MU_MIN:
            logger.debug("mu floor active at t=%g (mu_raw=%g)", t, m)
            return MU_MIN
        return m

    def mu_dot(self, t: float) -> float:
        """Time derivative of ``mu``; zero where the floor is active."""
        self._check_t(t)
        m = self._raw(t)
        if m < MU_MIN:
            return 0.0
        if self.kind == "power_law":
            return -self.rate * m / t
        return -self.rate * m

    def floor_time(self) -> float:
        """First time at which ``mu`` reaches ``MU_MIN``."""
        if self.c <= MU_MIN:
            return self.t0
        if self.kind == "power_law":
            return (self.c / MU_MIN) ** (1.0 / self.rate)
        return math.log(self.c / MU_MIN) / self.rate

    def check_h1(self) -> H1Check:
        return check_h1(self)

    def integral_t_mu(self, a: float, b: float) -> float:
        return integral_t_mu(self, a, b)

    def to_dict(self) -> dict:
        key = "p" if self.kind == "power_law" else "r"
        return {"kind": self.kind, "c": self.c, key: self.rate}


def mu(s: MuSchedule, t: float) -> float:
    return s.mu(t)


def mu_dot(s: MuSchedule, t: float) -> float:
    return s.mu_dot(t)


def check_h1(s: MuSchedule) -> H1Check:
    """Decide ``int_{t0}^inf t mu(t) dt < inf`` in closed form.

    Also reports the weaker ``int_{t0}^inf mu(t) / t dt < inf``.
    """
    if s.kind == "exponential":
        total = integral_t_mu(s, s.t0, math.inf)
        return H1Check(
            True,
            f"exponential decay: int t*mu = {total:.6g} (finite for every r > 0)",
            True,
            "exponential decay: int mu/t finite",
        )
    p, c, t0 = s.rate, s.c, s.t0
    if p > 2:
        total = c * t0 ** (2 - p) / (p - 2)
        reason = f"power law p={p:g} > 2: int t*mu = c*t0^(2-p)/(p-2) = {total:.6g}"
        ok = True
    elif p == 2:
        reason = "power law p=2: int t*mu = c*log(t) diverges"
        ok = False
    else:
        reason = f"power law p={p:g} < 2: int t*mu = c*t^(2-p)/(2-p) diverges"
        ok = False
    inv_t = c * t0 ** (-p) / p
    return H1Check(ok, reason, True, f"int mu/t = c*t0^(-p)/p = {inv_t:.6g}")


def integral_t_mu(s: MuSchedule, a: float, b: float) -> float:
    """Closed-form ``int_a^b t mu(t) dt`` for the unfloored schedule.

    ``b`` may be ``math.inf``; a divergent integral returns ``inf``.
    """
    if a > b:
        raise ValueError(f"integration bounds out of order: a={a} > b={b}")
    if a < s.t0:
        raise ValueError(f"a={a} precedes the schedule start t0={s.t0}")
    if a == b:
        return 0.0
    c, k = s.c, s.rate
    if s.kind == "exponential":
        def prim(t):
            if math.isinf(t):
                return 0.0
            return -c * math.exp(-k * t) * (t / k + 1.0 / k**2)
        return prim(b) - prim(a)
    if k == 2:
        return math.inf if math.isinf(b) else c * math.log(b / a)
    e = 2.0 - k
    if math.isinf(b):
        return math.inf if e > 0 else -c * a**e / e
    return c * (b**e - a**e) / e
