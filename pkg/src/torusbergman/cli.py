"""Command-line driver.

    torus-bergman <experiment> --config <path> --out <dir>

where <experiment> is one of dims, density, offdiag, far, ratio, embed,
pullback, derivs, or all.  `all` runs the config's enabled experiment list;
a named subcommand runs exactly that experiment.  Exit code is 0 iff every
criterion evaluated in the run passed.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .experiment import EXPERIMENTS, ConfigError, emit_report, parse_config, run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="torus-bergman",
                                     description="flat-torus Bergman kernel experiment suites")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS + ("all",):
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", required=True, help="output directory for CSV/JSON reports")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print("config validation failed:", file=sys.stderr)
        for ln, fieldn, msg in exc.violations:
            print(f"  line {ln}: [{fieldn}] {msg}", file=sys.stderr)
        return 2

    names = None if args.experiment == "all" else (args.experiment,)
    t0 = time.perf_counter()
    report = run(cfg, experiments=names)
    wall = time.perf_counter() - t0
    try:
        written = emit_report(report, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for c in report.criteria:
        verdict = "PASS" if c["pass"] else "FAIL"
        print(f"{c['criterion_id']} {verdict}  measured={c['measured']:.6g} "
              f"threshold={c['threshold']:.6g}  {c['description']}")
    for w in report.warnings:
        print(f"warning: {w}")
    print(f"wall time {wall:.1f}s; wrote {len(written)} files to {args.out}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
