"""``sim`` command-line entry point.

Exit codes: 0 success, 2 invalid configuration, 3 physics failure during
propagation, 4 a validation check outside tolerance.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__, experiments
from .config import ConfigError, ScenarioConfig
from .dynamics import IntegrationError
from .experiments import SweepSpec

log = logging.getLogger("chiralcav")

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_VALIDATE = 0, 2, 3, 4


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON (defaults to the nominal point)")
    common.add_argument("--out", type=Path, help="output directory (overrides the config)")
    common.add_argument("--seed", type=_u64, help="base seed (overrides the config)")
    common.add_argument("--mode", choices=("full", "effective"), help="Hamiltonian used for propagation")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="sim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("surface-a1", parents=[common], help="minimum A1 over (A2, T)")
    s.add_argument("--a2", nargs=3, type=float, default=(1.0, 4.0, 21), metavar=("LO", "HI", "COUNT"))
    s.add_argument("--t", nargs=3, type=float, default=(50.0, 450.0, 21), metavar=("LO", "HI", "COUNT"))

    sub.add_parser("timeseries", parents=[common], help="ideal L/R time traces")

    s = sub.add_parser("systematic", parents=[common], help="systematic pulse and detuning errors")
    s.add_argument("--points", type=int, default=experiments.DEFAULT_POINTS)
    s.add_argument("--grid", type=int, default=experiments.DEFAULT_POINTS)
    s.add_argument("--span", type=float, default=0.1)

    s = sub.add_parser("awgn", parents=[common], help="noisy-pulse ensemble")
    s.add_argument("--ensemble", type=int, default=50)
    s.add_argument("--snr-db", type=float)

    for name, text in (("decoherence", "single decoherence channels"), ("correction", "corrected vs original pulses")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--points", type=int, default=experiments.DEFAULT_POINTS)
        s.add_argument("--max-rate", type=float, default=0.01)

    sub.add_parser("validate", parents=[common], help="invariant checks on the scenario")
    return ap


def load_config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    changes = {}
    if args.out is not None:
        changes["out"] = str(args.out)
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.mode is not None:
        changes["mode"] = args.mode
    return cfg.with_(**changes) if changes else cfg


def dispatch(args, cfg: ScenarioConfig) -> int:
    out, th = cfg.out, args.threads
    cmd = args.command
    if cmd == "surface-a1":
        lo, hi, n = args.a2
        tlo, thi, tn = args.t
        spec = SweepSpec({"A2": (lo, hi, int(n)), "T": (tlo, thi, int(tn))})
        experiments.cmd_surface_a1(cfg.params, spec, out)
    elif cmd == "timeseries":
        experiments.cmd_timeseries(cfg, out)
    elif cmd == "systematic":
        experiments.cmd_systematic(cfg, args.points, args.grid, args.span, th, out)
    elif cmd == "awgn":
        experiments.cmd_awgn(cfg, args.ensemble, args.snr_db, th, out)
    elif cmd == "decoherence":
        experiments.cmd_decoherence(cfg, args.points, args.max_rate, th, out)
    elif cmd == "correction":
        experiments.cmd_correction(cfg, args.points, args.max_rate, th, out)
    elif cmd == "validate":
        checks = experiments.cmd_validate(cfg, out)
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: measured={c.measured:.6g} "
                  f"threshold={c.threshold:.3g} ({c.detail})")
        return EXIT_OK if all(c.passed for c in checks) else EXIT_VALIDATE
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return dispatch(args, cfg)
    except IntegrationError as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
