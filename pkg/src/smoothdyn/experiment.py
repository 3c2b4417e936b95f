"""Configured experiments: resolve a JSON config, run, diagnose, write outputs.

A config is a JSON object with the optional blocks ``problem``, ``dynamic``,
``schedule``, ``perturbation``, ``integrator``, ``initial``,
``diagnostics`` and ``output``; see ``README.md`` for the keys. Every output
file embeds the fully resolved config, so any artifact can be re-run from
its own metadata.
"""

from __future__ import annotations

import copy
import json
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import diagnostics as dg
from .dynamics import DynamicSpec, Perturbation
from .integrator import IntegratorConfig, integrate
from .problems import DEFAULT_SEED, PRESETS, build_example1, build_random_l2l1, standard_normal, uniform
from .schedule import MuSchedule
from .svg import line_plot

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


_PRESET_PERTURBATION = {"a": 20.0, "b": 1.0, "direction_seed": None}


def resolve_config(raw: dict, strict: bool = False, seed=None, out=None) -> dict:
    """Fill defaults, apply CLI overrides and validate; returns a new dict.

    Raises :class:`ConfigError` on any invalid entry. A schedule failing the
    ``int t mu(t) dt < inf`` certificate is an error under ``strict`` and a
    warning otherwise.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {"problem", "dynamic", "schedule", "perturbation", "integrator", "initial",
             "diagnostics", "output"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config blocks: {sorted(unknown)}")
    cfg = copy.deepcopy(raw)

    prob = cfg.setdefault("problem", {"preset": "ex1"})
    if "preset" in prob:
        pid = prob["preset"]
        if pid not in PRESETS:
            raise ConfigError(f"unknown preset {pid!r}; expected one of {sorted(PRESETS)}")
        info = PRESETS[pid]
        prob.setdefault("dims", list(info["dims"]) if info["dims"] else None)
        prob.setdefault("seed", None if info["dims"] is None else DEFAULT_SEED)
        if info["perturbed"] and "perturbation" not in cfg:
            cfg["perturbation"] = dict(_PRESET_PERTURBATION)
        cfg.setdefault("integrator", {}).setdefault("t_end", info["t_end"])
    else:
        dims = prob.get("dims")
        if not (isinstance(dims, list) and len(dims) == 3 and all(isinstance(d, int) and d > 0 for d in dims)):
            raise ConfigError("problem.dims must be three positive integers [mA, mD, n]")
        prob.setdefault("seed", DEFAULT_SEED)
        prob["preset"] = None

    dyn = cfg.setdefault("dynamic", {})
    dyn.setdefault("alpha", 7.0)
    dyn.setdefault("t0", 1.0)
    if not (isinstance(dyn["alpha"], (int, float)) and dyn["alpha"] > 0):
        raise ConfigError(f"dynamic.alpha must be positive, got {dyn['alpha']!r}")
    if not (isinstance(dyn["t0"], (int, float)) and dyn["t0"] > 0):
        raise ConfigError(f"dynamic.t0 must be positive, got {dyn['t0']!r}")

    sch = cfg.setdefault("schedule", {})
    sch.setdefault("kind", "power_law")
    sch.setdefault("c", 1.0)
    if sch["kind"] == "power_law":
        sch.setdefault("p", 3.0)
    elif sch["kind"] == "exponential":
        sch.setdefault("r", 1.0)
    try:
        schedule = _schedule(cfg)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"schedule: {exc}") from None
    h1 = schedule.check_h1()
    sch["h1_certified"] = h1.certified
    if not h1.certified:
        msg = f"schedule violates the integrability hypothesis int t*mu(t) dt < inf (H1): {h1.reason}"
        if strict:
            raise ConfigError(msg)
        warnings.warn(msg)

    pert = cfg.get("perturbation")
    if pert is not None:
        if not isinstance(pert, dict) or "a" not in pert or "b" not in pert:
            raise ConfigError("perturbation needs keys a and b")
        pert.setdefault("direction_seed", None)
        if not pert["b"] > 0:
            raise ConfigError("perturbation.b must be positive")
    cfg.setdefault("perturbation", None)

    integ = cfg.setdefault("integrator", {})
    integ.setdefault("t_end", 100.0)
    try:
        IntegratorConfig(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}") from None
    if not integ["t_end"] > dyn["t0"]:
        raise ConfigError("integrator.t_end must exceed dynamic.t0")

    init = cfg.setdefault("initial", {})
    if seed is not None:
        init["seed"] = int(seed)
    if "points" not in init:
        init.setdefault("count", 10)
        init.setdefault("box", [-5.0, 5.0])
        init.setdefault("seed", 0)
        if not (isinstance(init["count"], int) and init["count"] >= 1):
            raise ConfigError("initial.count must be a positive integer")
    else:
        if not isinstance(init["points"], list) or not init["points"]:
            raise ConfigError("initial.points must be a nonempty list of vectors")

    diag = cfg.setdefault("diagnostics", {})
    diag.setdefault("rate_window", [10.0, None])
    if out is not None:
        cfg["output"] = out
    cfg.setdefault("output", "out")

    # dimension checks need the problem
    n = 2 if prob.get("dims") is None else prob["dims"][2]
    if "points" in init and any(len(p) != n for p in init["points"]):
        raise ConfigError(f"initial points must have length {n}")
    return cfg


def _schedule(cfg) -> MuSchedule:
    sch = cfg["schedule"]
    t0 = float(cfg["dynamic"]["t0"])
    if sch["kind"] == "power_law":
        return MuSchedule.power_law(sch["c"], sch["p"], t0)
    if sch["kind"] == "exponential":
        return MuSchedule.exponential(sch["c"], sch["r"], t0)
    raise ValueError(f"unknown schedule kind {sch['kind']!r}")


def build(cfg: dict):
    """``(problem, spec, integrator_config, initial_points)`` from a resolved config."""
    prob = cfg["problem"]
    if prob.get("dims") is None:
        problem = build_example1()
    else:
        problem = build_random_l2l1(*prob["dims"], seed=prob["seed"])
    problem.provenance["example_id"] = prob.get("preset")
    n = problem.dim
    pert = None
    if cfg["perturbation"] is not None:
        p = cfg["perturbation"]
        ds = p.get("direction_seed")
        direction = np.ones(n) if ds is None else standard_normal(int(ds), n, stream=2)
        pert = Perturbation(p["a"], p["b"], direction)
    spec = DynamicSpec(
        alpha=float(cfg["dynamic"]["alpha"]),
        t0=float(cfg["dynamic"]["t0"]),
        objective=problem.objective,
        schedule=_schedule(cfg),
        perturbation=pert,
    )
    integ = {k: v for k, v in cfg["integrator"].items()}
    config = IntegratorConfig(**integ)
    init = cfg["initial"]
    if "points" in init:
        points = [np.asarray(p, dtype=float) for p in init["points"]]
    else:
        lo, hi = init["box"]
        u = uniform(int(init["seed"]), init["count"] * n, stream=1).reshape(init["count"], n)
        points = list(lo + (hi - lo) * u)
    return problem, spec, config, points


def diagnose(trajectory, spec, problem, rate_window=(10.0, None)):
    """Energy table and verdict list for one run."""
    xT = trajectory.x[-1]
    x_star = problem.project(xT) if problem.project is not None else np.asarray(problem.x_star)
    f_star = problem.f_star
    table = dg.energy_table(trajectory, spec, x_star=x_star, f_star=f_star, z=x_star)
    verdicts = []
    if spec.perturbation is None:
        verdicts.append(dg.check_W_monotone(table["W"]))
    else:
        verdicts.append(dg.check_W_monotone(table["Wg"], name="Wg_monotone"))
    verdicts.append(dg.check_nonnegative(table["E"], "E_nonnegative"))
    verdicts.append(dg.check_nonnegative(table["calE"], "calE_nonnegative"))
    if spec.perturbation is None:
        verdicts.append(dg.check_quasi_descent(trajectory, spec, x_star, calE=table["calE"]))
    for key in ("int_t_gap", "int_t_speed", "int_invt_speed"):
        verdicts.append(dg.check_plateau(table["t"], table[key], f"{key}_plateau"))
    verdicts.append(dg.check_rate_bounded(trajectory, f_star))
    verdicts.append(dg.check_velocity_vanishing(trajectory))
    verdicts.append(dg.check_anchor_stabilizes(table["t"], table["h_anchor"]))

    T = float(trajectory.t[-1])
    ta, tb = rate_window
    tb = T if tb is None else tb
    info = {"final_gap": float(trajectory.f_raw[-1] - f_star),
            "dist_to_opt": float(problem.dist_to_opt(xT))}
    try:
        info["slope"] = dg.fit_rate(trajectory, f_star, (ta, tb))
        verdicts.append(dg.Verdict("rate_slope", info["slope"], -1.8, info["slope"] <= -1.8))
    except ValueError as exc:
        info["slope"] = None
        verdicts.append(dg.Verdict("rate_slope", float("nan"), -1.8, False, str(exc)))
    try:
        info["decay_ratio"] = dg.decay_ratio(trajectory, f_star)
        ok = info["decay_ratio"] <= 0.5
        note = "" if spec.alpha > 3 else "alpha <= 3: o(t^-2) decay not implied; reported only"
        verdicts.append(dg.Verdict("t2_gap_decay", info["decay_ratio"], 0.5, ok, note))
    except ValueError as exc:
        info["decay_ratio"] = None
        verdicts.append(dg.Verdict("t2_gap_decay", float("nan"), 0.5, False, str(exc)))
    verdicts.append(dg.Verdict("dist_to_opt", info["dist_to_opt"], 1e-2, info["dist_to_opt"] <= 1e-2))
    return table, verdicts, info


_DIAG_COLUMNS = ["t", "W", "E", "calE", "t2_gap", "t2_E", "h_anchor",
                 "int_t_gap", "int_t_speed", "int_invt_speed"]


def write_diagnostics_csv(table: dict, path) -> None:
    cols = _DIAG_COLUMNS + (["Wg"] if "Wg" in table else [])
    data = np.column_stack([table[c] for c in cols])
    np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="", fmt="%.17g")


def run_one(cfg: dict, index: int) -> dict:
    """Integrate and diagnose initial point ``index``; writes ``run_XXX/``."""
    problem, spec, config, points = build(cfg)
    x0 = points[index]
    traj = integrate(spec, config, x0)
    table, verdicts, info = diagnose(traj, spec, problem, tuple(cfg["diagnostics"]["rate_window"]))
    run_dir = os.path.join(cfg["output"], f"run_{index:03d}")
    os.makedirs(run_dir, exist_ok=True)
    traj.to_csv(os.path.join(run_dir, "trajectory.csv"))
    write_diagnostics_csv(table, os.path.join(run_dir, "diagnostics.csv"))
    summary = {
        "index": index,
        "x0": np.asarray(x0).tolist(),
        **info,
        "events": traj.events,
        "n_steps": traj.metadata["n_steps"],
        "truncated": traj.truncated,
        "energy_verdicts": [v.to_dict() for v in verdicts],
        "pass": all(v.passed for v in verdicts),
    }
    with open(os.path.join(run_dir, "verdicts.json"), "w") as fh:
        json.dump({"config": cfg, **summary}, fh, indent=2)
    summary["_t"] = traj.t.tolist()
    summary["_gap"] = (traj.f_raw - problem.f_star).tolist()
    if problem.dim == 2:
        summary["_xy"] = traj.x.tolist()
    return summary


def _run_star(args):
    return run_one(*args)


def run_experiment(cfg: dict, parallel: int = 1) -> dict:
    """Run every initial point of a resolved config and write the summary and plots."""
    os.makedirs(cfg["output"], exist_ok=True)
    _, _, _, points = build(cfg)
    jobs = [(cfg, i) for i in range(len(points))]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            runs = list(ex.map(_run_star, jobs))
    else:
        runs = [run_one(*j) for j in jobs]

    series = [(r.pop("_t"), r.pop("_gap"), f"run {r['index']}") for r in runs]
    line_plot(series, os.path.join(cfg["output"], "gap_loglog.svg"),
              title="f(x(t)) - f*", xlabel="t", ylabel="gap", log=True)
    if all("_xy" in r for r in runs):
        xy = [(np.array(r["_xy"])[:, 0], np.array(r["_xy"])[:, 1], f"run {r['index']}") for r in runs]
        segs = [((0.5, 0.0), (0.0, 0.5))] if cfg["problem"].get("dims") is None else []
        line_plot(xy, os.path.join(cfg["output"], "trajectory_plane.svg"),
                  title="trajectories", xlabel="x1", ylabel="x2", extra_segments=segs)
    for r in runs:
        r.pop("_xy", None)
    summary = {"config": cfg, "runs": runs, "pass": all(r["pass"] for r in runs)}
    with open(os.path.join(cfg["output"], "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary
