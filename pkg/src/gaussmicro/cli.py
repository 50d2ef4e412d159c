"""Command-line experiment runner.

Every command writes CSV (to ``--output`` or stdout) preceded by ``#``
metadata lines; with ``--output`` a JSON summary is written next to it as
``<output>.json``.  Exit codes: 0 success, 1 failed validation, 2 bad config.
"""

import argparse
from datetime import datetime, timezone
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .classical import (NoCrossover, classical_average_fidelity, crossover_energy,
                        fit_value)
from .entanglement import entropy_samples, sigma_gap, DegenerateDistribution
from .haar import RngStream
from .stats import default_workers, WORKERS_ENV
from .teleportation import average_fidelity, mc_average_fidelity
from .validation import run_validation_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
# fields that do not influence results and are left out of the config echo
_NOT_ECHOED = {"output", "workers", "no_timestamp", "config", "func"}


class ConfigError(ValueError):
    def __init__(self, field, msg):
        super().__init__(f"{field}: {msg}")
        self.field = field


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _echo(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}


def _emit(args, header, rows, summary):
    buf = io.StringIO()
    buf.write(f"# gaussmicro {__version__}\n")
    buf.write(f"# command: {args.command}\n")
    buf.write(f"# config: {json.dumps(_echo(args), sort_keys=True)}\n")
    if not args.no_timestamp:
        buf.write(f"# timestamp: {datetime.now(timezone.utc).isoformat()}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        meta = {"command": args.command, "config": _echo(args), "version": __version__}
        meta.update(summary)
        if args.no_timestamp:
            meta.pop("wall_time", None)
        with open(args.output + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True, default=_fmt)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def _require(cond, field, msg):
    if not cond:
        raise ConfigError(field, msg)


def cmd_validate(args):
    t0 = time.perf_counter()
    checks = run_validation_suite(seed=args.seed, samples=args.samples)
    for c in checks:
        print(c.line(), file=sys.stderr)
    rows = [(c.name, c.measured, c.tolerance, "pass" if c.passed else "fail") for c in checks]
    ok = all(c.passed for c in checks)
    _emit(args, ["check", "measured", "tolerance", "status"], rows,
          {"passed": ok, "wall_time": time.perf_counter() - t0})
    return EXIT_OK if ok else EXIT_FAIL


def run_entropy_experiment(args):
    _require(args.modes >= 2, "modes", "n must be >= 2")
    _require(1 <= args.reduction, "reduction", "m must be >= 1")
    _require(args.reduction < args.modes, "reduction", "m must be < n")
    _require(args.energy >= 2 * args.modes, "energy", "E must be >= 2n")
    _require(args.samples >= 2, "samples", "need at least 2 samples")
    t0 = time.perf_counter()
    st = entropy_samples(args.reduction, args.modes, args.energy, args.samples,
                         RngStream(args.seed), random_modes=args.random_modes,
                         fixed_total=args.fixed_total, workers=args.workers)
    try:
        gap = sigma_gap(st) if args.reduction == 1 else math.nan
    except DegenerateDistribution:
        gap = math.nan
    header = ["n", "E", "m", "samples", "seed", "mean", "std", "max_observed", "smax",
              "sigma_gap"]
    row = (args.modes, float(args.energy), args.reduction, args.samples, args.seed,
           st.mean, st.std, st.max_observed, st.smax, gap)
    _emit(args, header, [row], {"mean": st.mean, "std": st.std, "sigma_gap": gap,
                                "histogram_bins": len(st.histogram),
                                "wall_time": time.perf_counter() - t0})
    return EXIT_OK


def _energy_grid(args):
    _require(args.emin >= 2.0, "emin", "grid must start at E >= 2")
    _require(args.emax > args.emin, "emax", "emax must exceed emin")
    _require(args.grid_points >= 2, "grid_points", "need >= 2 points")
    return np.linspace(args.emin, args.emax, args.grid_points)


def _check_quad(args):
    _require(args.quad_nodes >= 8, "quad_nodes", "need >= 8 quadrature nodes")
    _require(args.policy_nodes >= 2, "policy_nodes", "need >= 2 policy nodes")


def run_figure1(args):
    grid = _energy_grid(args)
    _require(all(r >= 0 for r in args.squeezing), "squeezing", "r must be >= 0")
    _check_quad(args)
    t0 = time.perf_counter()
    rows = []
    quad = (args.quad_nodes, args.quad_nodes)
    for E in grid:
        fcl = classical_average_fidelity(E, quad=quad, nodes=args.policy_nodes).value
        rows.append((E, *[average_fidelity(E, r) for r in args.squeezing], fcl))
    header = ["E", *[f"fbar_r{r:g}" for r in args.squeezing], "fcl"]
    _emit(args, header, rows, {"wall_time": time.perf_counter() - t0})
    return EXIT_OK


def run_teleport_curve(args):
    grid = _energy_grid(args)
    _require(all(r >= 0 for r in args.squeezing), "squeezing", "r must be >= 0")
    _require(args.samples >= 1000, "samples", "need >= 1000 samples")
    t0 = time.perf_counter()
    rows = []
    for i, r in enumerate(args.squeezing):
        for k, E in enumerate(grid):
            mc = mc_average_fidelity(E, r, args.samples, RngStream(args.seed, i * len(grid) + k),
                                     workers=args.workers)
            rows.append((E, r, average_fidelity(E, r), mc.mean, mc.stderr))
    _emit(args, ["E", "r", "fbar", "fbar_mc", "mc_stderr"], rows,
          {"wall_time": time.perf_counter() - t0})
    return EXIT_OK


def run_classical_threshold(args):
    _require(all(E > 2 for E in args.energy), "energy", "need E > 2")
    _check_quad(args)
    t0 = time.perf_counter()
    rows, consistent = [], True
    for k, E in enumerate(args.energy):
        res = classical_average_fidelity(E, quad=(args.quad_nodes, args.quad_nodes),
                                         nodes=args.policy_nodes, mc_samples=args.samples,
                                         rng=RngStream(args.seed, k), workers=args.workers)
        fit = float(fit_value(E))
        rows.append((E, res.value, fit, abs(res.value - fit), args.quad_nodes,
                     args.policy_nodes))
        if res.mc is not None:
            consistent &= bool(res.consistent)
        if args.policy_out:
            with open(f"{args.policy_out}_E{E:g}.csv", "w") as fh:
                res.policy.dump(fh)
    _emit(args, ["E", "fcl", "fit_value", "abs_dev", "quad_nodes", "policy_nodes"], rows,
          {"quadrature_mc_consistent": consistent, "wall_time": time.perf_counter() - t0})
    return EXIT_OK if consistent else EXIT_FAIL


def run_crossover(args):
    _require(all(r > 0 for r in args.squeezing), "squeezing", "r must be > 0")
    _require(args.emax > 2, "emax", "emax must exceed 2")
    _check_quad(args)
    t0 = time.perf_counter()
    rows = []
    for r in args.squeezing:
        try:
            ec = crossover_energy(r, tol=args.tol, E_hi=args.emax,
                                  quad=(args.quad_nodes, args.quad_nodes),
                                  nodes=args.policy_nodes)
            rows.append((r, ec, "found"))
        except NoCrossover:
            rows.append((r, math.nan, "none"))
    _emit(args, ["r", "crossover_E", "status"], rows, {"wall_time": time.perf_counter() - t0})
    return EXIT_OK


def _floats(text):
    return [float(t) for t in text.split(",")] if isinstance(text, str) else text


def build_parser():
    p = argparse.ArgumentParser(prog="gaussmicro", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, samples):
        sp.add_argument("--config", help="JSON file with option values (strict keys)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=samples)
        sp.add_argument("--output", default=None)
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default from ${WORKERS_ENV} or 1)")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamp and wall time so outputs are byte-comparable")

    def quad(sp):
        sp.add_argument("--quad-nodes", type=int, default=64)
        sp.add_argument("--policy-nodes", type=int, default=256)

    def grid(sp):
        sp.add_argument("--emin", type=float, default=2.05)
        sp.add_argument("--emax", type=float, default=10.0)
        sp.add_argument("--grid-points", type=int, default=40)

    sp = sub.add_parser("validate", help="run the built-in check suite")
    common(sp, 2000)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("entropy", help="entanglement entropy statistics")
    common(sp, 100_000)
    sp.add_argument("--modes", type=int, required=True)
    sp.add_argument("--energy", type=float, required=True)
    sp.add_argument("--reduction", type=int, default=1)
    sp.add_argument("--random-modes", action="store_true")
    sp.add_argument("--fixed-total", action="store_true")
    sp.set_defaults(func=run_entropy_experiment)

    sp = sub.add_parser("figure1", help="teleportation fidelities vs heterodyne threshold")
    common(sp, 0)
    grid(sp)
    quad(sp)
    sp.add_argument("--squeezing", type=_floats, default=[0.5, 1.0])
    sp.set_defaults(func=run_figure1)

    sp = sub.add_parser("teleport-curve", help="closed-form and Monte Carlo average fidelity")
    common(sp, 100_000)
    grid(sp)
    sp.add_argument("--squeezing", type=_floats, default=[1.0])
    sp.set_defaults(func=run_teleport_curve)

    sp = sub.add_parser("classical-threshold", help="optimised heterodyne threshold")
    common(sp, 100_000)
    quad(sp)
    sp.add_argument("--energy", type=_floats, default=[2.5, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
    sp.add_argument("--policy-out", default=None,
                    help="prefix for per-energy policy tables")
    sp.set_defaults(func=run_classical_threshold)

    sp = sub.add_parser("crossover", help="energy where teleportation beats the threshold")
    common(sp, 0)
    quad(sp)
    sp.add_argument("--squeezing", type=_floats, default=[1.0])
    sp.add_argument("--emax", type=float, default=8.0)
    sp.add_argument("--tol", type=float, default=1e-3)
    sp.set_defaults(func=run_crossover)
    return p, sub


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv=None):
    """Parse ``argv``; values from ``--config`` act as defaults that flags override."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, sub = build_parser()
    path = _config_path(argv)
    if path is not None:
        with open(path) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config", "top level must be a JSON object")
        command = next((a for a in argv if a in sub.choices), None)
        if command is None:
            raise ConfigError("command", "missing subcommand")
        sp = sub.choices[command]
        known = {a.dest for a in sp._actions} - {"help", "config"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown config field")
        for action in sp._actions:
            if action.dest in cfg:
                action.required = False
        sp.set_defaults(**cfg)
    args = parser.parse_args(argv)
    if args.workers is None:
        args.workers = default_workers()
    return args


def main(argv=None):
    try:
        args = parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
