"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import ConfigError, Pipeline, StageError, load_config

COMMANDS = {
    "ingest": "load and validate the survey; write dataset, polarity and department counts",
    "synth": "generate a synthetic survey from polarity counts; write survey.csv",
    "score": "GA feature scoring; write scores.csv",
    "tune": "SVM hyperparameter search; write tuning.csv",
    "select": "GA-SVM feature selection; write selection.json and trace.csv",
    "evaluate": "cross-validate the GA-SVM; write confusion.csv and metrics.json",
    "compare": "GA-SVM against the baselines on shared folds; write comparison.csv",
    "report": "usability report; write report.json and report.csv",
    "run": "full pipeline; write every artifact",
}

log = logging.getLogger("usability_ga")


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=d, help="JSON run configuration (default: bundled synthetic config)")
    parser.add_argument("--seed", type=int, default=d, help="master seed, overrides the config")
    parser.add_argument("--out", default=argparse.SUPPRESS if suppress else "out", help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usability-ga", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for name, help_ in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        _global_options(sp, suppress=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    try:
        pipeline = Pipeline(load_config(args.config), args.seed)
        written = pipeline.write(args.command, args.out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        if isinstance(e.cause, ConfigError):
            return 1
        return 2 if e.is_data_error else 3
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3
    for p in written:
        log.info("wrote %s", p)
    print(f"{args.command}: wrote {len(written)} files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
