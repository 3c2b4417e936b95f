"""Command-line entry point: ``smoothdyn {run, verify, rates}``.

Exit codes: 0 pass, 1 verification failure, 2 usage or input error. Errors
are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

from . import diagnostics as dg
from .experiment import ConfigError, resolve_config, run_experiment
from .integrator import Trajectory
from .problems import DEFAULT_SEED, PRESETS, build_example1, build_random_l2l1
from .smoothing import LOGEXP_PLUS, SQRT_ABS, DomainSampler, certify, lift_separable

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return EXIT_USAGE


# -- verify ------------------------------------------------------------------------


def verification_targets():
    """``{name: (function, sampler)}`` certified by ``verify``."""
    targets = {
        "sqrt_abs": (lift_separable(SQRT_ABS, 1), DomainSampler()),
        "logexp_plus": (lift_separable(LOGEXP_PLUS, 1), DomainSampler()),
        "ex1": (build_example1().objective, DomainSampler()),
    }
    for pid in ("ex2", "ex3"):
        prob = build_random_l2l1(*PRESETS[pid]["dims"], seed=DEFAULT_SEED)
        # fewer samples in the larger dimension keep the run short
        targets[pid] = (prob.objective, DomainSampler(box=(-2.0, 2.0), count=400,
                                                      center=prob.x_star))
    return targets


def cmd_verify(names=None) -> int:
    targets = verification_targets()
    names = list(names) if names else list(targets)
    unknown = [n for n in names if n not in targets]
    if unknown:
        return _emit_error("usage", f"unknown verification target(s) {unknown}; choose from {sorted(targets)}")
    ok = True
    for name in names:
        f, sampler = targets[name]
        report = certify(f, sampler, label=name)
        print(report.table())
        ok &= report.passed
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_PASS if ok else EXIT_FAIL


# -- run -----------------------------------------------------------------------------


def cmd_run(config_path, strict=False, out=None, seed=None, parallel=1) -> int:
    if config_path is None:
        raw = {"problem": {"preset": "ex1"}}
    else:
        try:
            with open(config_path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            return _emit_error("config", f"cannot read {config_path}: {exc}")
        except json.JSONDecodeError as exc:
            return _emit_error("config", f"{config_path}: invalid JSON ({exc})")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            cfg = resolve_config(raw, strict=strict, seed=seed, out=out)
        for w in caught:
            sys.stderr.write(json.dumps({"warning": str(w.message)}) + "\n")
    except ConfigError as exc:
        return _emit_error("config", str(exc))
    if parallel < 1:
        return _emit_error("usage", "--parallel must be at least 1")
    summary = run_experiment(cfg, parallel=parallel)
    for r in summary["runs"]:
        failed = [v["name"] for v in r["energy_verdicts"] if not v["pass"]]
        slope = "n/a" if r["slope"] is None else f"{r['slope']:.3f}"
        print(f"run {r['index']:03d}: final_gap={r['final_gap']:.3e} slope={slope} "
              f"dist={r['dist_to_opt']:.2e} {'PASS' if r['pass'] else 'FAIL ' + ','.join(failed)}")
    print(f"summary written to {cfg['output']}/summary.json:", "PASS" if summary["pass"] else "FAIL")
    return EXIT_PASS if summary["pass"] else EXIT_FAIL


# -- rates ---------------------------------------------------------------------------


def cmd_rates(trajectory_csv, f_star, window=None) -> int:
    try:
        traj = Trajectory.from_csv(trajectory_csv)
    except OSError as exc:
        return _emit_error("input", f"cannot read {trajectory_csv}: {exc}")
    except ValueError as exc:
        return _emit_error("input", str(exc))
    T = float(traj.t[-1])
    window = (10.0, T) if window is None else tuple(window)
    try:
        slope = dg.fit_rate(traj, f_star, window)
        ratio = dg.decay_ratio(traj, f_star)
    except ValueError as exc:
        return _emit_error("input", str(exc))
    ok = slope <= -1.8 and ratio <= 0.5
    print(f"slope: {slope:.3f}")
    print(f"decay_ratio: {ratio:.4g}")
    print("rates:", "PASS" if ok else "FAIL")
    return EXIT_PASS if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smoothdyn", description="Smoothed inertial dynamics: run, verify, rates.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    r = sub.add_parser("run", help="integrate a configured experiment")
    r.add_argument("--config", metavar="PATH", help="JSON config (default: preset ex1)")
    r.add_argument("--strict", action="store_true", help="reject schedules failing the integrability check")
    r.add_argument("--out", metavar="DIR")
    r.add_argument("--seed", type=int, metavar="N", help="seed for generated initial points")
    r.add_argument("--parallel", type=int, default=1, metavar="K")
    v = sub.add_parser("verify", help="certify smoothing functions and preset objectives")
    v.add_argument("targets", nargs="*", help="subset of sqrt_abs, logexp_plus, ex1, ex2, ex3")
    q = sub.add_parser("rates", help="rate fit on a trajectory CSV")
    q.add_argument("trajectory_csv")
    q.add_argument("--f-star", type=float, required=True)
    q.add_argument("--window", type=float, nargs=2, metavar=("A", "B"))
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _emit_error("usage", str(exc))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.config, strict=args.strict, out=args.out, seed=args.seed,
                       parallel=args.parallel)
    if args.command == "verify":
        return cmd_verify(args.targets)
    if args.command == "rates":
        return cmd_rates(args.trajectory_csv, args.f_star, args.window)
    return _emit_error("usage", "expected a subcommand: run, verify or rates")


if __name__ == "__main__":
    sys.exit(main())
