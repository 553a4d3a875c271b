"""
Main entry point of scert: scenario certificates, data-set sizing and unit commitment
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional

from cli.commands import (
    cmd_certify,
    cmd_gen_demand,
    cmd_risk,
    cmd_run_incremental,
    cmd_size,
    cmd_support,
)
from utils.config import (
    CertifyConfig,
    GenDemandConfig,
    RiskConfig,
    RunIncrementalConfig,
    SizeConfig,
    SizeMode,
    SupportConfig,
    TieBreak,
    validated,
)
from utils.errors import ScertError


def _add_demand_shape(p: argparse.ArgumentParser):
    p.add_argument("--base", type=float, default=22.0, help="base load level (GW)")
    p.add_argument("--daily-amp", type=float, default=8.0, help="amplitude of the daily peaks (GW)")
    p.add_argument("--season-amp", type=float, default=3.0, help="seasonal level swing (GW)")
    p.add_argument("--day-sd", type=float, default=None,
                   help="std of the day-level shift (GW, default 10 x noise-sd)")
    p.add_argument("--noise-sd", type=float, default=0.15, help="std of the hourly noise (GW)")


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--gap-tol", type=float, default=1e-6,
                   help="relative optimality gap of the branch-and-bound (dimensionless)")
    p.add_argument("--node-limit", type=int, default=20000, help="branch-and-bound node limit (nodes)")
    p.add_argument("--convex-only", action="store_true",
                   help="use the convex reduction xi* as the decision instead of solving unit commitment")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="scert", formatter_class=fmt,
                                     description="Scenario-approach certificates and sizing")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", formatter_class=fmt,
                       help="a posteriori risk certificate of a scenario CSV")
    p.add_argument("scenarios", help="CSV of b-values, one scenario per row")
    p.add_argument("--beta", type=float, required=True, help="confidence parameter (probability)")
    p.add_argument("--tie-break", choices=[t.value for t in TieBreak],
                   default=TieBreak.SMALLEST_INDEX.value, help="dominant index choice on exact ties")
    p.add_argument("--csv", dest="csv_path", help="write the report as CSV to this path")

    p = sub.add_parser("size", formatter_class=fmt, help="data-set size for a target risk")
    p.add_argument("--q", type=int, required=True, help="number of uncertain constraints")
    p.add_argument("--eps-bar", type=float, required=True, help="target risk level (probability)")
    p.add_argument("--beta", type=float, required=True, help="confidence parameter (probability)")
    p.add_argument("--mode", choices=[m.value for m in SizeMode], default=SizeMode.ONESHOT.value,
                   help="sizing rule")
    p.add_argument("--csv", dest="csv_path", help="write the report as CSV to this path")

    p = sub.add_parser("run-incremental", formatter_class=fmt,
                       help="staged data collection with the unit-commitment solver")
    p.add_argument("--units", dest="units_path", required=True, help="unit-parameter JSON file")
    p.add_argument("--demand", dest="demand_csv",
                   help="demand CSV (GW) consumed in row order; default is the synthetic stream")
    p.add_argument("--eps-bar", type=float, required=True, help="target risk level (probability)")
    p.add_argument("--beta", type=float, required=True, help="confidence parameter (probability)")
    p.add_argument("--seed", type=int, required=True, help="seed of the synthetic stream")
    p.add_argument("--runs", type=int, default=1, help="independent runs, seeds seed..seed+runs-1")
    p.add_argument("--export-lp", help="write the reduced model to this LP file instead of solving")
    p.add_argument("--validation", dest="validation_csv",
                   help="demand CSV (GW) for the empirical risk")
    p.add_argument("--compare-oneshot", action="store_true",
                   help="also solve on the one-shot number of rows of the same stream")
    p.add_argument("--solution-out", help="write the decision as JSON to this path")
    p.add_argument("--csv", dest="csv_path", help="write one CSV row per run to this path")
    _add_solver_flags(p)
    _add_demand_shape(p)

    p = sub.add_parser("risk", formatter_class=fmt, help="empirical risk of a stored decision")
    p.add_argument("solution", help="decision JSON written by run-incremental --solution-out")
    p.add_argument("--validation", dest="validation_csv", required=True,
                   help="validation scenarios (demand CSV in GW for unit-commitment decisions)")
    p.add_argument("--training", dest="training_csv",
                   help="training scenarios, enables the per-sample dominance check")
    p.add_argument("--csv", dest="csv_path", help="write the report as CSV to this path")

    p = sub.add_parser("support", formatter_class=fmt,
                       help="greedy support list and the bounds it gives")
    p.add_argument("--units", dest="units_path", help="unit-parameter JSON file")
    p.add_argument("--demand", dest="demand_csv", required=True, help="demand CSV (GW)")
    p.add_argument("--beta", type=float, default=0.05, help="confidence parameter (probability)")
    p.add_argument("--equality-tol", type=float, default=1e-6,
                   help="tolerance of the solution comparison (GW, relative for the cost)")
    p.add_argument("--validation", dest="validation_csv", help="demand CSV (GW) for the empirical risk")
    p.add_argument("--validation-fraction", type=float, default=0.0,
                   help="share of the demand rows held out for validation (fraction)")
    p.add_argument("--seed", type=int, help="seed of the train/validation split")
    p.add_argument("--csv", dest="csv_path", help="write the report as CSV to this path")
    _add_solver_flags(p)

    p = sub.add_parser("gen-demand", formatter_class=fmt, help="write a synthetic demand CSV")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--n-days", type=int, required=True, help="number of daily profiles (days)")
    p.add_argument("--t", type=int, default=24, help="slots per day (h)")
    p.add_argument("--out", dest="out_path", required=True, help="output CSV path")
    _add_demand_shape(p)
    return parser


_COMMANDS = {
    "certify": (CertifyConfig, cmd_certify),
    "size": (SizeConfig, cmd_size),
    "run-incremental": (RunIncrementalConfig, cmd_run_incremental),
    "risk": (RiskConfig, cmd_risk),
    "support": (SupportConfig, cmd_support),
    "gen-demand": (GenDemandConfig, cmd_gen_demand),
}

_RENAMED = {"scenarios": "scenarios_path", "solution": "solution_path"}


def run(argv: Optional[List[str]] = None) -> Dict:
    """Parse argv, validate the command's parameters and run it"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    config_cls, command = _COMMANDS[args.command]
    values = {_RENAMED.get(k, k): v for k, v in vars(args).items()
              if k not in ("command", "verbose")}
    return command(validated(config_cls, **values))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point

    Returns:
        0 on success, 2 when a command reports an error
    """
    try:
        run(argv)
    except (ScertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
