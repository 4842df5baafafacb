"""Command-line entry point.

    pmneumann <pipeline> --config cfg.json [--seed N] [--out DIR]
                         [--threads N]

Pipelines: pde, particle, verify, compare, route-check, sweep.  Exit
status: 0 when every declared tolerance passed, 1 when a tolerance
failed, 2 on configuration or usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import PmError

_COMMANDS = ("pde", "particle", "verify", "compare", "route-check", "sweep")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pmneumann",
        description="Half-line Neumann diffusion laboratory: PDE solver, "
                    "particle schemes, and verification suites.")
    sub = parser.add_subparsers(dest="pipeline", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", required=True,
                       help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None,
                       help="override particle.seed")
        p.add_argument("--out", default=None,
                       help="run directory (default: runs/<pipeline>)")
        p.add_argument("--threads", type=int, default=None,
                       help="numba thread cap (best effort)")
    return parser


def _set_threads(n):
    if n is None:
        return
    try:
        import numba

        numba.set_num_threads(max(1, n))
    except Exception:
        pass


def main(argv=None):
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    pipeline = args.pipeline.replace("-", "_")
    out = Path(args.out) if args.out else Path("runs") / pipeline
    try:
        report = harness.run(args.config, pipeline, out, seed=args.seed)
    except PmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for check in report.checks:
        flag = "PASS" if check["passed"] else "FAIL"
        print(f"[{flag}] {check['rule']}: value={check['value']} "
              f"tolerance={check['tolerance']}")
    print(f"report: {out / 'report.json'}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
