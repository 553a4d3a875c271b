"""
Batch experiment runner for scert
Writes one CSV per experiment, row by row, so partial runs keep their results

Experiments:
    sizes        one-shot vs eps-based data-set size over a grid of eps_bar
    incremental  n_used of the staged driver over seeded synthetic demand streams
    coverage     fraction of runs whose true risk exceeds eps_bar
"""
import argparse
import logging
import math
import os
import sys
import time
from datetime import datetime
from typing import Dict, List, Optional

import numpy as np
from tabulate import tabulate

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from certificates.scenario_core import empirical_risk, risk_under_independence
from cli.solvers import UcReducedSolver
from sizing.incremental import ConvexReductionSolver, GeneratorSource, run_incremental
from sizing.schedule import SizingSpec, eps_based_size, incremental_schedule, one_shot_size
from ucp.demand import DemandModel, split_train_validation, synth_demand
from ucp.units import load_instance
from utils.csv_io import append_record, initialize_csv
from utils.errors import ParameterError, ScertError
from utils.metrics import SolveMetrics

logger = logging.getLogger("run_experiments")

SIZE_FIELDS = ["q", "eps_bar", "beta", "oneshot_n", "epsbased_n", "delta_n"]
RUN_FIELDS = ["seed", "j_stop", "n_used", "sigma", "eps_post", "oneshot_n", "n_q",
              "validation_risk", "seconds"]
HIST_FIELDS = ["bin_low", "bin_high", "runs"]
COVERAGE_FIELDS = ["seed", "n_used", "j_stop", "true_risk", "exceeds"]

DEFAULT_EPS_GRID = [0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5]


def print_banner(title: str, lines: List[str]):
    print(f"\n{'='*80}")
    print(title)
    print(f"{'='*80}")
    for line in lines:
        print(line)
    print(f"{'='*80}\n")


def run_sizes(output_csv: str, q: int, beta: float, eps_grid: List[float]):
    """Delta N = eps-based size minus one-shot size over the eps grid"""
    print_banner("Data-set size grid", [f"q: {q}", f"beta: {beta}", f"Output: {output_csv}"])
    initialize_csv(output_csv, SIZE_FIELDS)
    print(f"✓ Initialized CSV file: {output_csv}\n")

    for eps_bar in eps_grid:
        spec = SizingSpec(q=q, eps_bar=eps_bar, beta=beta)
        m = one_shot_size(spec)
        n = eps_based_size(spec)
        append_record(output_csv, SIZE_FIELDS, {
            "q": q, "eps_bar": eps_bar, "beta": beta,
            "oneshot_n": m, "epsbased_n": n, "delta_n": n - m,
        })
        print(f"  eps_bar={eps_bar:<6} one-shot {m:>7}  eps-based {n:>7}  Delta N {n - m:>6}")

    print(f"\n✓ All results saved to: {output_csv}")


def _validation_rows(q: int, seed: int, n_days: int) -> np.ndarray:
    """b-values of the validation half of a synthetic demand file"""
    data = synth_demand(seed, n_days, t=q)
    _, validation = split_train_validation(data, seed)
    return -validation.profiles


def run_incremental_batch(output_csv: str, spec: SizingSpec, runs: int, first_seed: int,
                          units_path: Optional[str] = None, bins: int = 20,
                          validation_days: int = 730):
    """
    Seeded runs of the staged driver on the stationary demand stream

    Without `units_path` the reduced solver returns xi itself, which is the
    decision of the convex reduction. With a desk-scale unit file each run
    solves the reduced unit-commitment problem.
    """
    schedule = incremental_schedule(spec)
    oneshot = one_shot_size(spec)
    n_q = int(schedule.n_j[-1])
    demand = DemandModel(spec.q)
    metrics = SolveMetrics()
    if units_path:
        inst = load_instance(units_path)
        if inst.horizon != spec.q:
            raise ParameterError(f"unit file horizon {inst.horizon} differs from q={spec.q}")
        solver = UcReducedSolver(inst, metrics=metrics)
    else:
        solver = ConvexReductionSolver(metrics)
    validation = _validation_rows(spec.q, first_seed + runs, validation_days)

    print_banner("Incremental runs", [
        f"q: {spec.q}  eps_bar: {spec.eps_bar}  beta: {spec.beta}",
        f"Runs: {runs} (seeds {first_seed}..{first_seed + runs - 1})",
        f"Solver: {'unit commitment, ' + units_path if units_path else 'convex reduction'}",
        f"One-shot size: {oneshot}  Largest threshold N_q: {n_q}",
        f"Output: {output_csv}",
    ])
    initialize_csv(output_csv, RUN_FIELDS)
    print(f"✓ Initialized CSV file: {output_csv}\n")

    used = []
    failed = 0
    for i in range(runs):
        seed = first_seed + i
        start = time.time()
        try:
            result = run_incremental(spec, GeneratorSource(spec.q, demand.sample_b, seed), solver, schedule)
        except ScertError as exc:
            logger.error("run with seed %d failed: %s", seed, exc)
            failed += 1
            continue
        used.append(result.n_used)
        append_record(output_csv, RUN_FIELDS, {
            "seed": seed, "j_stop": result.j_stop, "n_used": result.n_used,
            "sigma": result.summary.distinct_count,
            "eps_post": result.a_posteriori_eps(spec.beta),
            "oneshot_n": oneshot, "n_q": n_q,
            "validation_risk": empirical_risk(result.decision, validation),
            "seconds": round(time.time() - start, 4),
        })
        if (i + 1) % 10 == 0 or i + 1 == runs:
            print(f"  {i + 1}/{runs} runs done")

    if not used:
        print("\n❌ No run completed")
        return

    counts, edges = np.histogram(used, bins=bins)
    hist_csv = os.path.splitext(output_csv)[0] + "_hist.csv"
    initialize_csv(hist_csv, HIST_FIELDS)
    for low, high, count in zip(edges[:-1], edges[1:], counts):
        append_record(hist_csv, HIST_FIELDS, {"bin_low": low, "bin_high": high, "runs": int(count)})

    below = sum(n < oneshot for n in used)
    summary = metrics.get_summary()
    print_banner("INCREMENTAL SUMMARY", [
        tabulate([
            ["completed runs", len(used)],
            ["failed runs", failed],
            ["n_used min / median / max", f"{min(used)} / {int(np.median(used))} / {max(used)}"],
            [f"runs below one-shot {oneshot}", below],
            ["runs above N_q", sum(n > n_q for n in used)],
            ["reduced solves", summary["solve_calls"]],
        ], tablefmt="simple"),
        f"\n✓ Runs saved to: {output_csv}",
        f"✓ Histogram saved to: {hist_csv}",
    ])


def run_coverage(output_csv: str, spec: SizingSpec, runs: int, first_seed: int,
                 low: float, high: float) -> Dict:
    """
    Staged runs on independent uniform hourly demand, where the true risk of
    any decision has a closed form
    """
    schedule = incremental_schedule(spec)

    def draw(rng, count):
        return -rng.uniform(low, high, size=(count, spec.q))

    def survival(g):
        # P(b >= g) = P(demand <= -g)
        return np.clip((-np.asarray(g) - low) / (high - low), 0.0, 1.0)

    print_banner("Coverage", [
        f"q: {spec.q}  eps_bar: {spec.eps_bar}  beta: {spec.beta}",
        f"Hourly demand: uniform on [{low}, {high}]",
        f"Runs: {runs}",
        f"Output: {output_csv}",
    ])
    initialize_csv(output_csv, COVERAGE_FIELDS)
    print(f"✓ Initialized CSV file: {output_csv}\n")

    exceed = 0
    for i in range(runs):
        seed = first_seed + i
        result = run_incremental(spec, GeneratorSource(spec.q, draw, seed), ConvexReductionSolver(), schedule)
        risk = risk_under_independence(result.decision, survival)
        exceeds = risk > spec.eps_bar
        exceed += exceeds
        append_record(output_csv, COVERAGE_FIELDS, {
            "seed": seed, "n_used": result.n_used, "j_stop": result.j_stop,
            "true_risk": risk, "exceeds": exceeds,
        })

    rate = exceed / runs if runs else 0.0
    limit = spec.beta + 3.0 * math.sqrt(spec.beta * (1.0 - spec.beta) / runs) if runs else spec.beta
    print_banner("COVERAGE SUMMARY", [
        f"Runs with risk above {spec.eps_bar}: {exceed}/{runs} ({rate:.4f})",
        f"Confidence target beta: {spec.beta}  (3-sigma limit {limit:.4f})",
        f"{'✓' if rate <= limit else '❌'} Coverage {'holds' if rate <= limit else 'violated'}",
        f"\n✓ All results saved to: {output_csv}",
    ])
    return {"runs": runs, "exceed": exceed, "rate": rate, "limit": limit}


def main():
    """
    Main entry point
    """
    parser = argparse.ArgumentParser(description="Run scert batch experiments")
    parser.add_argument("experiment", choices=["sizes", "incremental", "coverage"])
    parser.add_argument("--output", "-o", default=None,
                        help="Output CSV file path (default: auto-generated with timestamp)")
    parser.add_argument("--q", type=int, default=None,
                        help="number of constraints (default: 100 for sizes, 24 for incremental, 4 for coverage)")
    parser.add_argument("--eps-bar", type=float, default=None, help="target violation level")
    parser.add_argument("--beta", type=float, default=None, help="confidence parameter")
    parser.add_argument("--eps-grid", type=float, nargs="+", default=DEFAULT_EPS_GRID,
                        help="eps_bar values of the size grid")
    parser.add_argument("--runs", "-n", type=int, default=None,
                        help="number of seeded runs (default: 100, 2000 for coverage)")
    parser.add_argument("--seed", type=int, default=0, help="first seed")
    parser.add_argument("--units", default=None,
                        help="desk-scale unit file; incremental runs then solve the reduced UC problem")
    parser.add_argument("--bins", type=int, default=20, help="histogram bins of n_used")
    parser.add_argument("--low", type=float, default=20.0, help="coverage: lowest hourly demand")
    parser.add_argument("--high", type=float, default=30.0, help="coverage: highest hourly demand")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")

    args = parser.parse_args()
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    # Generate output filename if not provided
    if args.output is None:
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        os.makedirs("results", exist_ok=True)
        args.output = f"results/{args.experiment}_{timestamp}.csv"

    try:
        if args.experiment == "sizes":
            run_sizes(args.output, args.q or 100, args.beta or 1e-6, args.eps_grid)
        elif args.experiment == "incremental":
            q = args.q or (load_instance(args.units).horizon if args.units else 24)
            spec = SizingSpec(q=q, eps_bar=args.eps_bar or 0.1, beta=args.beta or 1e-6)
            run_incremental_batch(args.output, spec, args.runs or 100, args.seed,
                                  units_path=args.units, bins=args.bins)
        else:
            spec = SizingSpec(q=args.q or 4, eps_bar=args.eps_bar or 0.2, beta=args.beta or 0.05)
            run_coverage(args.output, spec, args.runs or 2000, args.seed, args.low, args.high)
    except (ScertError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(2)


if __name__ == "__main__":
    main()
