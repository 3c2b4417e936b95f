"""Adaptive Dormand-Prince 5(4) integration of the phase-space system.

Steps are controlled by the embedded error estimate (PI controller) and
additionally capped by ``eta / sqrt(ell + L / mu(t))`` so that the explicit
scheme stays inside its stability region as ``mu(t) -> 0`` stiffens the
field. Samples are written on a fixed time grid using the continuous
extension of each accepted step.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .dynamics import DynamicSpec, PhaseState

logger = logging.getLogger(__name__)

__all__ = [
    "IntegratorConfig",
    "TrajectorySample",
    "Trajectory",
    "integrate",
    "interpolate",
]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Shampine's 4th-order continuous extension: y(t + th*h) = y + h K^T P [th, th^2, th^3, th^4]
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_GROW_MAX = 5.0
_SHRINK_MIN = 0.2
# PI exponents for an order-4 error estimate
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    eta_stability: float = 1.0
    record_every: float = 0.1
    # keep every step's interpolant so interpolate() reproduces the integrator exactly
    dense: bool = False

    def __post_init__(self):
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")
        if not self.eta_stability > 0:
            raise ValueError("eta_stability must be positive")
        if not self.record_every > 0:
            raise ValueError("record_every must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class TrajectorySample(NamedTuple):
    t: float
    x: np.ndarray
    v: np.ndarray
    f_raw: float
    f_smooth: float
    grad_norm: float
    step_size: float


@dataclass
class Trajectory:
    """Recorded samples of one integration run.

    Array attributes share their first axis (one row per sample). ``accel``
    holds the field's ``v'`` at each sample and backs Hermite interpolation
    when per-step interpolants were not kept.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    f_raw: np.ndarray
    f_smooth: np.ndarray
    grad_norm: np.ndarray
    step_size: np.ndarray
    accel: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)
    events: List[str] = field(default_factory=list)
    # per accepted step: (t_start, h, y_start, Q) with Q = K^T P
    segments: Optional[list] = field(default=None, repr=False)

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> TrajectorySample:
        return TrajectorySample(
            float(self.t[i]), self.x[i], self.v[i], float(self.f_raw[i]),
            float(self.f_smooth[i]), float(self.grad_norm[i]), float(self.step_size[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def truncated(self) -> bool:
        return bool(self.metadata.get("truncated", False))

    def window(self, ta: float, tb: float) -> np.ndarray:
        """Indices of samples with ``ta <= t <= tb``."""
        return np.nonzero((self.t >= ta - 1e-12) & (self.t <= tb + 1e-12))[0]

    def interpolate(self, t: float) -> PhaseState:
        return interpolate(self, t)

    # -- CSV -----------------------------------------------------------------

    def columns(self) -> list:
        n = self.dim
        return (["t"] + [f"x_{i}" for i in range(n)] + [f"v_{i}" for i in range(n)]
                + ["f_raw", "f_smooth", "grad_norm", "step_size"])

    def to_csv(self, path) -> None:
        data = np.column_stack([
            self.t, self.x, self.v, self.f_raw, self.f_smooth, self.grad_norm, self.step_size,
        ])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for row in data:
                w.writerow([repr(float(u)) for u in row])

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty CSV")
        header = rows[0]
        if header[0] != "t" or header[-4:] != ["f_raw", "f_smooth", "grad_norm", "step_size"]:
            raise ValueError(f"{path}: unexpected columns {header}")
        ncols = len(header)
        if (ncols - 5) % 2:
            raise ValueError(f"{path}: odd number of state columns")
        n = (ncols - 5) // 2
        try:
            data = np.array([[float(u) for u in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise ValueError(f"{path}: malformed numeric entry ({exc})") from None
        if data.ndim != 2 or data.shape[1] != ncols or data.shape[0] == 0:
            raise ValueError(f"{path}: ragged or empty data")
        return cls(
            t=data[:, 0], x=data[:, 1:1 + n], v=data[:, 1 + n:1 + 2 * n],
            f_raw=data[:, -4], f_smooth=data[:, -3], grad_norm=data[:, -2], step_size=data[:, -1],
        )


def _stability_cap(spec: DynamicSpec, t: float, eta: float) -> float:
    f = spec.objective
    lip = f.lip_smooth + f.lip_nonsmooth / spec.schedule.mu(t)
    return math.inf if lip <= 0 else eta / math.sqrt(lip)


def integrate(spec: DynamicSpec, config: IntegratorConfig, x0, v0=None) -> Trajectory:
    """Integrate from ``(t0, x0, v0)`` to ``config.t_end``.

    ``v0`` defaults to zero. A step size falling below ``h_min`` ends the run
    early with a ``stiffness budget exceeded`` event; a non-finite accepted
    state raises ``FloatingPointError``.
    """
    n = spec.dim
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    v0 = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float).reshape(-1)
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"initial data must have length {n}")
    if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(v0))):
        raise FloatingPointError("non-finite initial data")
    t0, t_end = spec.t0, float(config.t_end)
    if not t_end > t0:
        raise ValueError(f"t_end={t_end} must exceed t0={t0}")

    F = spec.field
    obj = spec.objective
    mu_of = spec.schedule.mu
    rtol, atol, eta = config.rtol, config.atol, config.eta_stability
    h_min, h_max = config.h_min, config.h_max
    dt_rec = config.record_every

    # record grid: t0 + k*dt, plus t_end
    n_rec = int(math.floor((t_end - t0) / dt_rec + 1e-9))
    grid = t0 + dt_rec * np.arange(n_rec + 1)
    if t_end - grid[-1] > 1e-9 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    else:
        grid[-1] = t_end

    rec_t, rec_y, rec_a, rec_h = [], [], [], []
    segments = [] if config.dense else None
    events: List[str] = []

    def record(tr, yr, hr):
        rec_t.append(tr)
        rec_y.append(yr)
        rec_a.append(F(tr, yr)[n:])
        rec_h.append(hr)

    y = np.concatenate((x0, v0))
    t = t0
    K = np.empty((7, 2 * n))
    K[0] = F(t, y)
    record(t, y.copy(), 0.0)
    gi = 1
    h = min(config.h_init, h_max)
    err_old = 1e-4
    n_acc = n_rej = 0
    n_eval = 1
    rejected_last = False
    floor_t = spec.schedule.floor_time()
    floor_logged = False
    truncated = False

    while t < t_end:
        cap = _stability_cap(spec, t, eta)
        h = min(h, h_max, cap)
        if t + h > t_end or t_end - (t + h) < 1e-12 * t_end:
            h = t_end - t
        else:
            h = min(h, _stability_cap(spec, t + h, eta))
        if h < h_min:
            msg = f"stiffness budget exceeded at t={t:.10g} (h={h:.3e} < h_min={h_min:.3e})"
            logger.warning(msg)
            events.append(msg)
            truncated = True
            break

        for i in range(1, 7):
            K[i] = F(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
        n_eval += 6
        y_new = y + h * (_B @ K)
        err_vec = h * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err):
            err = math.inf

        if err <= 1.0:
            t_new = t + h if t + h < t_end else t_end
            if segments is not None or (gi < len(grid) and grid[gi] <= t_new):
                Q = K.T @ _P
            if segments is not None:
                segments.append((t, h, y.copy(), Q.copy()))
            while gi < len(grid) and grid[gi] <= t_new + 1e-12 * t_new:
                tg = grid[gi]
                if tg >= t_new:
                    yg = y_new.copy()
                else:
                    th = (tg - t) / h
                    yg = y + h * (Q @ np.array([th, th**2, th**3, th**4]))
                record(tg, yg, h)
                gi += 1
            if not np.all(np.isfinite(y_new)):
                raise FloatingPointError(f"non-finite state at t={t_new}")
            if not floor_logged and t_new >= floor_t:
                msg = f"mu floor {mu_of(t_new):.1e} reached at t={t_new:.6g}; mu frozen"
                logger.info(msg)
                events.append(msg)
                floor_logged = True
            t, y = t_new, y_new
            K[0] = K[6]  # FSAL
            n_acc += 1
            fac = _SAFETY * err ** (-_EXPO) * err_old**_BETA if err > 0 else _GROW_MAX
            fac = min(_GROW_MAX, max(_SHRINK_MIN, fac))
            if rejected_last:
                fac = min(fac, 1.0)
            h = h * fac
            err_old = max(err, 1e-4)
            rejected_last = False
        else:
            n_rej += 1
            fac = _SAFETY * err ** (-_EXPO) if math.isfinite(err) else _SHRINK_MIN
            h = h * min(1.0, max(_SHRINK_MIN, fac))
            rejected_last = True

    T = np.array(rec_t)
    Y = np.array(rec_y)
    X, V = Y[:, :n], Y[:, n:]
    f_raw = np.empty(len(T))
    f_sm = np.empty(len(T))
    gn = np.empty(len(T))
    for k, (tk, xk) in enumerate(zip(T, X)):
        m = mu_of(tk)
        f_raw[k] = obj._underlying(xk)
        f_sm[k] = obj._value(xk, m)
        gn[k] = np.linalg.norm(obj._grad_x(xk, m))

    metadata = {
        "spec": spec_echo(spec),
        "config": config.to_dict(),
        "x0": x0.tolist(),
        "v0": v0.tolist(),
        "n_steps": n_acc,
        "n_rejected": n_rej,
        "n_evals": n_eval,
        "truncated": truncated,
        "t_reached": float(t),
    }
    return Trajectory(
        t=T, x=X, v=V, f_raw=f_raw, f_smooth=f_sm, grad_norm=gn,
        step_size=np.array(rec_h), accel=np.array(rec_a), metadata=metadata,
        events=events, segments=segments,
    )


def spec_echo(spec: DynamicSpec) -> dict:
    return {
        "alpha": spec.alpha,
        "t0": spec.t0,
        "objective": {"label": spec.objective.label, **spec.objective.constants()},
        "schedule": spec.schedule.to_dict(),
        "perturbation": None if spec.perturbation is None else spec.perturbation.to_dict(),
    }


def _hermite5(t0, t1, x0, v0, a0, x1, v1, a1, t):
    """Quintic Hermite position and its derivative on ``[t0, t1]``."""
    h = t1 - t0
    s = (t - t0) / h
    s2, s3, s4, s5 = s * s, s**3, s**4, s**5
    h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5
    h10 = s - 6 * s3 + 8 * s4 - 3 * s5
    h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5
    h01 = 10 * s3 - 15 * s4 + 6 * s5
    h11 = -4 * s3 + 7 * s4 - 3 * s5
    h21 = 0.5 * s3 - s4 + 0.5 * s5
    d00 = (-30 * s2 + 60 * s3 - 30 * s4) / h
    d10 = (1 - 18 * s2 + 32 * s3 - 15 * s4) / h
    d20 = (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) / h
    d01 = (30 * s2 - 60 * s3 + 30 * s4) / h
    d11 = (-12 * s2 + 28 * s3 - 15 * s4) / h
    d21 = (1.5 * s2 - 4 * s3 + 2.5 * s4) / h
    x = h00 * x0 + h * h10 * v0 + h * h * h20 * a0 + h01 * x1 + h * h11 * v1 + h * h * h21 * a1
    v = d00 * x0 + h * d10 * v0 + h * h * d20 * a0 + d01 * x1 + h * d11 * v1 + h * h * d21 * a1
    return x, v


def interpolate(trajectory: Trajectory, t: float) -> PhaseState:
    """Phase state at time ``t`` inside the recorded range.

    Uses the integrator's own continuous extension when the run kept its
    step interpolants (``dense=True``), otherwise quintic Hermite
    interpolation through the recorded ``(x, v, v')`` samples (cubic in
    ``x`` and linear in ``v`` if accelerations are unavailable).
    """
    T = trajectory.t
    if not (T[0] - 1e-12 <= t <= T[-1] + 1e-12):
        raise ValueError(f"t={t} outside the recorded range [{T[0]}, {T[-1]}]")
    n = trajectory.dim
    k = int(np.searchsorted(T, t))
    if k < len(T) and T[k] == t:
        return PhaseState(float(t), trajectory.x[k].copy(), trajectory.v[k].copy())

    segs = trajectory.segments
    if segs:
        starts = getattr(trajectory, "_seg_starts", None)
        if starts is None or len(starts) != len(segs):
            starts = np.array([s[0] for s in segs])
            trajectory._seg_starts = starts
        j = max(0, int(np.searchsorted(starts, t, side="right")) - 1)
        ts, h, ys, Q = segs[j]
        th = (t - ts) / h
        y = ys + h * (Q @ np.array([th, th**2, th**3, th**4]))
        return PhaseState(float(t), y[:n], y[n:])

    k = min(max(k, 1), len(T) - 1)
    t0, t1 = T[k - 1], T[k]
    x0, x1 = trajectory.x[k - 1], trajectory.x[k]
    v0, v1 = trajectory.v[k - 1], trajectory.v[k]
    if trajectory.accel is not None:
        x, v = _hermite5(t0, t1, x0, v0, trajectory.accel[k - 1], x1, v1, trajectory.accel[k], t)
        return PhaseState(float(t), x, v)
    h = t1 - t0
    s = (t - t0) / h
    x = ((2 * s**3 - 3 * s**2 + 1) * x0 + (s**3 - 2 * s**2 + s) * h * v0
         + (-2 * s**3 + 3 * s**2) * x1 + (s**3 - s**2) * h * v1)
    v = (1 - s) * v0 + s * v1
    return PhaseState(float(t), x, v)
