"""Command line entry point: ``fairwin run ...``."""

from __future__ import annotations

import argparse
import logging
import sys

from .experiment import BASELINES, ExperimentConfig, run_experiment, summarize, write_report
from .metric import ConfigError

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _caps(text: str) -> dict:
    caps = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        color, eq, cap = item.partition("=")
        try:
            if not eq:
                raise ValueError
            caps[int(color)] = int(cap)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected color=cap pairs, got {item!r}")
    return caps


def _modes(text: str) -> tuple:
    return tuple(m.strip() for m in text.split(",") if m.strip())


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairwin", description="Sliding-window fair center experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="stream a dataset through the sketch and report")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="FILE", help="CSV with a header, features then color")
    src.add_argument("--gen", metavar="SPEC",
                     help="blobs:d=5,n=1000000 or rotated:base=FILE|blobs,dim=15")
    run.add_argument("--window", type=int, default=2000)
    caps = run.add_mutually_exclusive_group()
    caps.add_argument("--k-total", type=int, default=14,
                      help="total centers split over colors by frequency")
    caps.add_argument("--k", type=_caps, metavar="C=K,...", help="explicit per-color caps")
    run.add_argument("--beta", type=float, default=2.0)
    acc = run.add_mutually_exclusive_group()
    acc.add_argument("--delta", type=_floats, default=(0.5, 1.0, 2.0, 4.0))
    acc.add_argument("--epsilon", type=float)
    run.add_argument("--mode", type=_modes, default=("standard",),
                     help="comma list of standard, oblivious, validation-only")
    run.add_argument("--baseline", choices=BASELINES, default="none")
    run.add_argument("--query-every", type=int, default=50)
    run.add_argument("--measure", type=int, default=50)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", metavar="FILE")
    run.add_argument("--json", action="store_true", help="write the report as JSON")
    run.add_argument("--color-col", metavar="NAME")
    run.add_argument("--dmin", type=float)
    run.add_argument("--dmax", type=float)
    run.add_argument("--no-timings", action="store_true",
                     help="report zero timings so reports are byte-reproducible")
    run.add_argument("--serial", action="store_true", help="run configurations one at a time")
    return parser


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        source=args.input if args.input is not None else args.gen,
        window=args.window,
        caps=args.k,
        k_total=args.k_total,
        beta=args.beta,
        deltas=args.delta,
        epsilon=args.epsilon,
        modes=args.mode,
        query_every=args.query_every,
        measure=args.measure,
        baseline=args.baseline,
        seed=args.seed,
        color_col=args.color_col,
        dmin=args.dmin,
        dmax=args.dmax,
        timings=not args.no_timings,
        serial=args.serial,
    )


def _print_summary(rows) -> None:
    cols = ("mode", "delta", "queries", "window_radius", "ratio", "mem_points", "update_us")
    print("\t".join(cols))
    for entry in summarize(rows):
        print("\t".join("" if entry[c] is None else f"{entry[c]:.6g}" if isinstance(entry[c], float)
                        else str(entry[c]) for c in cols))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        rows = run_experiment(cfg)
        if args.out:
            write_report(rows, args.out, "json" if args.json else "csv")
        _print_summary(rows)
    except ConfigError as exc:
        print(f"fairwin: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"fairwin: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


if __name__ == "__main__":
    sys.exit(main())
