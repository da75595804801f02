"""``subordinator-lab`` command line."""
from __future__ import annotations

import argparse
import sys

from ..errors import SubLabError
from .config import EXPERIMENTS, load_config
from .plotting import PLOT_KINDS, emit_plot
from .runner import EXIT_ERROR, report, run_experiment, write_error


def build_parser():
    p = argparse.ArgumentParser(
        prog="subordinator-lab",
        description="Simulate subordinator first passages and check their limit laws.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        e = sub.add_parser(name, help=f"run the {name} experiment")
        e.add_argument("--config", required=True, help="JSON experiment config")
        e.add_argument("--seed", type=int, help="override the config seed")
        e.add_argument("--n", type=int, help="override replicas per level")
        e.add_argument("--out", help="output CSV path")
        e.add_argument("--eps-rel", type=float, dest="eps_rel", help="override policy.eps_rel")
    pl = sub.add_parser("plot", help="render a CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--kind", choices=PLOT_KINDS, required=True)
    pl.add_argument("--out", help="SVG path (default: CSV path with .svg)")
    pl.add_argument("--alpha", type=float, help="Beta index for a bare samples CSV")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        try:
            path = emit_plot(args.csv, args.kind, args.out, args.alpha)
        except SubLabError as exc:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_ERROR
        print(f"wrote {path}", file=sys.stderr)
        return 0
    try:
        cfg = load_config(args.config).with_overrides(
            experiment=args.command, seed=args.seed, n=args.n, output=args.out, eps_rel=args.eps_rel,
        )
    except SubLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if args.out:
            write_error(args.out, exc)
        return EXIT_ERROR
    result = run_experiment(cfg)
    report(result)
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
