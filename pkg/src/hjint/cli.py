"""``hjint`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, IntegrationError, ReferenceSolverError
from .experiments import SUMMARY_COLUMNS, load_config, run_convergence, run_drift, run_single
from .selftest import run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("hjint")


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hjint", description="Hamilton-Jacobi Poisson integrators")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate one configuration")
    s.add_argument("--config", required=True)

    c = sub.add_parser("converge", help="global error over an (order, step) grid")
    c.add_argument("--config", required=True)
    c.add_argument("--orders", type=_ints, default=[2, 4, 6, 8])
    c.add_argument("--hs", type=_floats, default=[0.1, 0.05, 0.025, 0.0125])
    c.add_argument("--jobs", type=int, default=1, help="worker processes for the sweep")

    d = sub.add_parser("drift", help="long-time energy and Casimir drift")
    d.add_argument("--config", required=True)
    d.add_argument("--t-final", type=float, default=None)

    sub.add_parser("selftest", help="chart identity and jet property checks")
    return p


def _print_summary(rows):
    print(",".join(SUMMARY_COLUMNS))
    for r in rows:
        print(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in r.row()))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "selftest":
            results = run_selftest()
            for name, ok, detail in results:
                print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
            return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC
        cfg = load_config(args.config)
        if args.command == "simulate":
            rows = [run_single(cfg)]
        elif args.command == "converge":
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            rows = run_convergence(cfg, args.orders, args.hs, jobs=args.jobs)
        else:
            if args.t_final is not None and args.t_final < 0:
                raise ConfigError("--t-final must be non-negative")
            rows = [run_drift(cfg, args.t_final)]
    except ConfigError as exc:
        print(f"hjint: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"hjint: numerical failure at step {exc.step_index}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERIC
    except ReferenceSolverError as exc:
        print(f"hjint: numerical failure in reference solver: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _print_summary(rows)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
