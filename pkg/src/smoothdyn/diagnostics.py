"""Lyapunov energies, rate fits and integral estimates along trajectories.

All checks operate on recorded samples. Exact continuous-time inequalities
are tested with small tolerances that absorb integration and quadrature
error.

A "decade" below means the last (or first) ten time units of a run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import DynamicSpec
from .integrator import Trajectory, interpolate

__all__ = [
    "Verdict",
    "EnergyRecord",
    "energy_W",
    "energy_E",
    "energy_calE",
    "h_anchor",
    "energy_table",
    "check_W_monotone",
    "check_nonnegative",
    "check_quasi_descent",
    "fit_rate",
    "decay_ratio",
    "check_rate_bounded",
    "running_integrals",
    "check_plateau",
    "perturbed_energy_Wg",
    "perturbed_energy_series",
    "check_velocity_vanishing",
    "check_anchor_stabilizes",
    "GAP_FLOOR",
]

GAP_FLOOR = 1e-16
DECADE = 10.0


@dataclass
class Verdict:
    name: str
    max_violation: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "max_violation": self.max_violation,
             "tolerance": self.tolerance, "pass": bool(self.passed)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class EnergyRecord:
    t: float
    W: float
    E: float
    calE: float
    h_anchor: float
    running_int_t_gap: float
    running_int_t_speed: float
    running_int_invt_speed: float


def _mu(spec, t):
    return spec.schedule.mu(t)


# -- pointwise energies ----------------------------------------------------------


def energy_W(spec: DynamicSpec, sample) -> float:
    """``1/2 |v|^2 + f~(x, mu) + kappa mu``; nonincreasing along unperturbed runs."""
    m = _mu(spec, sample.t)
    f = spec.objective
    return 0.5 * float(sample.v @ sample.v) + f.value(sample.x, m) + f.kappa * m


def energy_E(spec: DynamicSpec, sample, x_star) -> float:
    """``1/2 |v|^2 + f~(x, mu) - f~(x*, mu) + 2 kappa mu``; nonnegative for optimal ``x*``."""
    m = _mu(spec, sample.t)
    f = spec.objective
    return (0.5 * float(sample.v @ sample.v) + f.value(sample.x, m)
            - f.value(x_star, m) + 2.0 * f.kappa * m)


def energy_calE(spec: DynamicSpec, sample, x_star) -> float:
    """``t^2 (f~(x,mu) - f~(x*,mu) + 2 kappa mu) + 1/2 |(alpha-1)(x - x*) + t v|^2``."""
    t = sample.t
    m = _mu(spec, t)
    f = spec.objective
    w = (spec.alpha - 1.0) * (np.asarray(sample.x) - x_star) + t * np.asarray(sample.v)
    return t * t * (f.value(sample.x, m) - f.value(x_star, m) + 2.0 * f.kappa * m) + 0.5 * float(w @ w)


def h_anchor(sample, z) -> float:
    d = np.asarray(sample.x) - np.asarray(z)
    return 0.5 * float(d @ d)


def energy_table(trajectory: Trajectory, spec: DynamicSpec, x_star=None, f_star=None, z=None) -> dict:
    """Per-sample energies as arrays.

    Keys: ``t, W`` always; ``E, calE, t2_E`` when ``x_star`` is given;
    ``t2_gap`` and the running integrals when ``f_star`` is given;
    ``h_anchor`` when ``z`` is given; ``Wg`` when the dynamic is perturbed and
    ``f_star`` is given.
    """
    f = spec.objective
    T = trajectory.t
    N = len(T)
    mus = np.array([_mu(spec, t) for t in T])
    speed2 = np.einsum("ij,ij->i", trajectory.v, trajectory.v)
    fsm = np.array([f._value(x, m) for x, m in zip(trajectory.x, mus)])
    out = {"t": T.copy(), "W": 0.5 * speed2 + fsm + f.kappa * mus}
    if x_star is not None:
        x_star = np.asarray(x_star, dtype=float)
        fstar_sm = np.array([f._value(x_star, m) for m in mus])
        smooth_gap = fsm - fstar_sm + 2.0 * f.kappa * mus
        out["E"] = 0.5 * speed2 + smooth_gap
        out["t2_E"] = T**2 * out["E"]
        w = (spec.alpha - 1.0) * (trajectory.x - x_star) + T[:, None] * trajectory.v
        out["calE"] = T**2 * smooth_gap + 0.5 * np.einsum("ij,ij->i", w, w)
    if f_star is not None:
        out["t2_gap"] = T**2 * (trajectory.f_raw - f_star)
        out.update(running_integrals(trajectory, f_star))
        if spec.perturbation is not None:
            out["Wg"] = perturbed_energy_series(spec, trajectory, f_star)
    if z is not None:
        d = trajectory.x - np.asarray(z, dtype=float)
        out["h_anchor"] = 0.5 * np.einsum("ij,ij->i", d, d)
    assert all(len(v) == N for v in out.values())
    return out


def records(table: dict):
    """Iterate a full :func:`energy_table` as :class:`EnergyRecord` rows."""
    for i in range(len(table["t"])):
        yield EnergyRecord(
            t=float(table["t"][i]), W=float(table["W"][i]), E=float(table["E"][i]),
            calE=float(table["calE"][i]), h_anchor=float(table["h_anchor"][i]),
            running_int_t_gap=float(table["int_t_gap"][i]),
            running_int_t_speed=float(table["int_t_speed"][i]),
            running_int_invt_speed=float(table["int_invt_speed"][i]),
        )


# -- inequality checks -----------------------------------------------------------


def check_W_monotone(W, name: str = "W_monotone") -> Verdict:
    """``W[k+1] <= W[k] + 1e-6 (1 + |W[k]|)`` for all consecutive samples."""
    W = np.asarray(W, dtype=float)
    if len(W) < 2:
        return Verdict(name, 0.0, 0.0, True)
    tol = 1e-6 * (1.0 + np.abs(W[:-1]))
    excess = np.diff(W) - tol
    worst = int(np.argmax(excess))
    return Verdict(name, float(np.diff(W)[worst]), float(tol[worst]), bool(excess[worst] <= 0))


def check_nonnegative(values, name: str, tol: float = 1e-10) -> Verdict:
    m = float(np.min(values))
    return Verdict(name, max(0.0, -m), tol, m >= -tol)


def check_quasi_descent(trajectory: Trajectory, spec: DynamicSpec, x_star, calE=None) -> Verdict:
    """For all ``t_i < t_j``: ``E(t_j) - E(t_i) <= 2 (alpha-1) kappa int_{t_i}^{t_j} s mu(s) ds``.

    ``E`` here is the scaled energy ``calE``. With ``rho = calE - 2(alpha-1)
    kappa int_{t0}^t s mu``, the worst pair is ``rho_j - min_{i<j} rho_i``.
    Outside ``alpha >= 3`` the inequality is not implied, and the verdict is
    informational (``note`` says so).
    """
    if calE is None:
        calE = energy_table(trajectory, spec, x_star=x_star)["calE"]
    T = trajectory.t
    sched = spec.schedule
    slack = 2.0 * (spec.alpha - 1.0) * spec.objective.kappa
    bound = np.array([slack * sched.integral_t_mu(spec.t0, t) for t in T])
    rho = calE - bound
    run_min = np.minimum.accumulate(rho)
    viol = rho[1:] - run_min[:-1]
    worst = float(np.max(viol)) if len(viol) else 0.0
    tol = 1e-5 * (1.0 + float(calE[0]))
    note = "" if spec.alpha >= 3 else "alpha < 3: inequality not implied; reported only"
    return Verdict("calE_quasi_descent", worst, tol, worst <= tol, note)


def _gap_window(t, gap, window):
    t = np.asarray(t, dtype=float)
    gap = np.asarray(gap, dtype=float)
    ta, tb = window
    mask = (t >= ta - 1e-12) & (t <= tb + 1e-12) & (gap > GAP_FLOOR)
    return t[mask], gap[mask]


def fit_rate(trajectory, f_star: float, window) -> float:
    """Least-squares slope of ``log(f - f*)`` against ``log t`` on ``window``.

    ``trajectory`` may be a :class:`Trajectory` or a ``(t, f_raw)`` pair.
    Samples with gap at or below ``1e-16`` are dropped; fewer than 10 usable
    samples is an error.
    """
    if isinstance(trajectory, Trajectory):
        t, fr = trajectory.t, trajectory.f_raw
    else:
        t, fr = trajectory
    tw, gw = _gap_window(t, np.asarray(fr, dtype=float) - f_star, window)
    if len(tw) < 10:
        raise ValueError(f"only {len(tw)} usable samples in window {tuple(window)}; need at least 10")
    slope, _ = np.polyfit(np.log(tw), np.log(gw), 1)
    return float(slope)


def decay_ratio(trajectory, f_star: float, t_end: Optional[float] = None) -> float:
    """``T^2 gap(T) / ((T/4)^2 gap(T/4))``; below 1/2 indicates ``o(t^-2)`` decay.

    Values between samples are linearly interpolated.
    """
    if isinstance(trajectory, Trajectory):
        t, fr = trajectory.t, trajectory.f_raw
    else:
        t, fr = trajectory
    t = np.asarray(t, dtype=float)
    gap = np.asarray(fr, dtype=float) - f_star
    T = float(t[-1]) if t_end is None else float(t_end)
    if T / 4 < t[0]:
        raise ValueError(f"T/4={T/4} precedes the first sample t={t[0]}")
    t2g = t**2 * gap
    return float(np.interp(T, t, t2g) / np.interp(T / 4, t, t2g))


def check_rate_bounded(trajectory: Trajectory, f_star: float) -> Verdict:
    """``T^2 gap(T)`` does not exceed the running maximum of ``t^2 gap`` on ``[t0+1, T]``."""
    t = trajectory.t
    t2g = t**2 * (trajectory.f_raw - f_star)
    w = t >= t[0] + 1.0
    if not np.any(w):
        w = np.ones_like(t, dtype=bool)
    peak = float(np.max(t2g[w]))
    return Verdict("t2_gap_bounded", float(t2g[-1]), peak, bool(t2g[-1] <= peak))


# -- integral estimates ------------------------------------------------------------


def _cumtrapz(y, t):
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def running_integrals(trajectory: Trajectory, f_star: float) -> dict:
    """Trapezoidal running integrals of ``t (f - f*)``, ``t |v|^2`` and ``|v|^2 / t``."""
    t = trajectory.t
    speed2 = np.einsum("ij,ij->i", trajectory.v, trajectory.v)
    return {
        "int_t_gap": _cumtrapz(t * (trajectory.f_raw - f_star), t),
        "int_t_speed": _cumtrapz(t * speed2, t),
        "int_invt_speed": _cumtrapz(speed2 / t, t),
    }


def check_plateau(t, running, name: str, fraction: float = 0.05) -> Verdict:
    """The increment over the final decade is at most ``fraction`` of the total."""
    t = np.asarray(t)
    running = np.asarray(running)
    total = float(running[-1])
    start = float(np.interp(max(t[0], t[-1] - DECADE), t, running))
    inc = total - start
    if total <= 0:
        return Verdict(name, inc, 0.0, inc <= 0)
    return Verdict(name, inc / total, fraction, inc <= fraction * total)


# -- perturbed energy ------------------------------------------------------------

# 3-point Gauss-Legendre on [0, 1]
_GL_X = 0.5 + 0.5 * np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GL_W = np.array([5.0, 8.0, 5.0]) / 18.0


def _tail_forcing_work(spec: DynamicSpec, trajectory: Trajectory) -> np.ndarray:
    """``int_{t_k}^{T} <v(s), g(s)> ds`` at every sample ``t_k``.

    Each sample interval is integrated with 3-point Gauss-Legendre on the
    trajectory's interpolant.
    """
    T = trajectory.t
    pieces = np.zeros(len(T) - 1)
    for k in range(len(T) - 1):
        a, b = T[k], T[k + 1]
        h = b - a
        acc = 0.0
        for xq, wq in zip(_GL_X, _GL_W):
            s = a + xq * h
            acc += wq * float(interpolate(trajectory, s).v @ spec.perturbation(s))
        pieces[k] = acc * h
    tail = np.zeros(len(T))
    tail[:-1] = np.cumsum(pieces[::-1])[::-1]
    return tail


def perturbed_energy_series(spec: DynamicSpec, trajectory: Trajectory, f_star: float) -> np.ndarray:
    """Finite-horizon perturbed energy at every sample.

    ``1/2 |v|^2 + f~(x, mu) - f* + kappa mu + int_t^T <v, g>``, with ``T`` the
    last recorded time.
    """
    if spec.perturbation is None:
        raise ValueError("the dynamic has no perturbation configured")
    f = spec.objective
    mus = np.array([_mu(spec, t) for t in trajectory.t])
    speed2 = np.einsum("ij,ij->i", trajectory.v, trajectory.v)
    fsm = np.array([f._value(x, m) for x, m in zip(trajectory.x, mus)])
    return 0.5 * speed2 + fsm - f_star + f.kappa * mus + _tail_forcing_work(spec, trajectory)


def perturbed_energy_Wg(spec: DynamicSpec, trajectory: Trajectory, sample, f_star: float = 0.0) -> float:
    """Perturbed energy at one recorded ``sample`` (see :func:`perturbed_energy_series`)."""
    if spec.perturbation is None:
        raise ValueError("the dynamic has no perturbation configured")
    k = int(np.argmin(np.abs(trajectory.t - sample.t)))
    if abs(trajectory.t[k] - sample.t) > 1e-12 * max(1.0, abs(sample.t)):
        raise ValueError(f"t={sample.t} is not a recorded sample time")
    return float(perturbed_energy_series(spec, trajectory, f_star)[k])


# -- trajectory behaviour ----------------------------------------------------------


def check_velocity_vanishing(trajectory: Trajectory) -> Verdict:
    """``|v(T)| <= 0.1 max |v|`` over the first decade."""
    t = trajectory.t
    sp = np.linalg.norm(trajectory.v, axis=1)
    first = sp[t <= t[0] + DECADE]
    ref = float(np.max(first))
    return Verdict("velocity_vanishing", float(sp[-1]), 0.1 * ref, bool(sp[-1] <= 0.1 * ref))


def check_anchor_stabilizes(t, h, fraction: float = 0.05) -> Verdict:
    """Spread of ``h`` over the final decade, relative to its peak over the run."""
    t = np.asarray(t)
    h = np.asarray(h)
    tail = h[t >= t[-1] - DECADE]
    scale = float(np.max(h))
    spread = float(np.max(tail) - np.min(tail))
    rel = spread / scale if scale > 0 else 0.0
    return Verdict("anchor_stabilizes", rel, fraction, rel <= fraction)
