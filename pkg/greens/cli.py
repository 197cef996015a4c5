"""Command line entry point: `greens --p 3 --k 4 --divisor ... --target ...`."""
import argparse
import logging
import sys
from fractions import Fraction

from greens import audit_log
from greens.config import (
    DEFAULT_BRANCH,
    DEFAULT_K,
    DEFAULT_LOSS_BUDGET,
    DEFAULT_P,
    DEFAULT_PIN,
    DEFAULT_PRECISION,
    Config,
    load_divisor,
    load_expression,
    parse_form,
)
from greens.errors import ConfigError, GreensError
from greens.pipeline import run_pipeline
from greens.report import level_table, plot_levels, write_levels_csv

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

logger = logging.getLogger("greens.cli")


def _cutoff(value):
    if value == "auto":
        return None
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"level cutoff must be 'auto' or an integer, got {value!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="greens", description="Higher Green's function values at RM points via p-adic modular symbols."
    )
    parser.add_argument("--p", type=int, default=DEFAULT_P, help="odd prime p")
    parser.add_argument("--k", type=int, default=DEFAULT_K, help="even weight k >= 4")
    parser.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="target p-adic digits N")
    parser.add_argument("--series-order", type=int, default=None, help="series order M (default N + n + 5)")
    parser.add_argument("--level-cutoff", type=_cutoff, default=None, help="maximum level, or 'auto'")
    parser.add_argument("--branch", type=Fraction, default=Fraction(DEFAULT_BRANCH), help="log branch L = log_L(p)")
    parser.add_argument("--branch-pin", type=int, choices=(1, -1), default=DEFAULT_PIN, help="square-root sign pin")
    parser.add_argument("--guard-digits", type=int, default=None, help="extra working digits")
    parser.add_argument("--loss-budget", type=int, default=DEFAULT_LOSS_BUDGET, help="digits allowed for defects")
    parser.add_argument("--divisor", required=True, help="JSON divisor, inline or a file path")
    parser.add_argument("--symmetrize", action="store_true", help="replace D by D + varpi(D)")
    parser.add_argument("--target", default=None, help="target form as JSON [a, b, c]")
    parser.add_argument("--expected", default=None, help="expected-expression file")
    parser.add_argument("--report", default=None, help="report path (.json for JSON)")
    parser.add_argument("--levels-csv", default=None, help="write the per-level table as CSV")
    parser.add_argument("--plot", default=None, help="write the per-level chart as HTML")
    parser.add_argument("--checkpoint-dir", default=None, help="save and resume level functions here")
    parser.add_argument("--log-level", default="INFO", help="logging level")
    return parser


def config_from_args(args):
    return Config(
        p=args.p,
        k=args.k,
        N=args.precision,
        M=args.series_order,
        L_cut=args.level_cutoff,
        L_branch=args.branch,
        divisor=load_divisor(args.divisor, args.symmetrize),
        target=parse_form(args.target) if args.target else None,
        expected=load_expression(args.expected) if args.expected else None,
        guard_digits=args.guard_digits,
        branch_pin=args.branch_pin,
        loss_budget=args.loss_budget,
        checkpoint_dir=args.checkpoint_dir,
    )


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT)
    audit_log.reset()
    try:
        cfg = config_from_args(args)
        report = run_pipeline(cfg)
    except ConfigError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return 2
    except GreensError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return 1

    if args.report:
        report.write(args.report)
    else:
        sys.stdout.write(report.to_text())
    table = level_table(report.level_rows)
    if args.levels_csv:
        write_levels_csv(table, args.levels_csv)
    if args.plot and table.empty:
        logger.warning("no level increments to plot")
    elif args.plot:
        plot_levels(table, args.plot)
    logger.debug(f"stage records:\n{audit_log.records_frame().to_string()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
