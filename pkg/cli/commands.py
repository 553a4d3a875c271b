"""
Command bodies of the scert command line

Each command takes a validated RunConfig, prints a human-readable report and
returns the same figures as a dictionary. With csv_path set, the figures are
also written as CSV with a header row.
"""
import json
import logging
import os
from typing import Dict, List, Optional

import numpy as np

from certificates.certmath import apriori_eps
from certificates.scenario_core import (
    Decision,
    ScenarioSet,
    a_posteriori_certificate,
    dominance_check,
    dominance_gap_rows,
    empirical_risk,
    reduce,
    violation_mask,
)
from certificates.support import ConvexReductionOracle, compare_bounds, complexity_gap, greedy_support
from cli import reports
from cli.solvers import LpExportSolver, UcReducedSolver, UcSupportOracle, check_solver_cap
from sizing.incremental import (
    ArraySource,
    ConvexReductionSolver,
    GeneratorSource,
    run_incremental,
    run_with_oneshot_comparison,
)
from sizing.schedule import SizingSpec, eps_based_size, incremental_schedule, one_shot_size
from ucp.demand import DemandData, DemandModel, split_train_validation, synth_demand
from ucp.model_builder import UcSolution
from ucp.units import load_instance
from utils.config import (
    CertifyConfig,
    GenDemandConfig,
    RiskConfig,
    RunIncrementalConfig,
    SizeConfig,
    SizeMode,
    SupportConfig,
)
from utils.csv_io import append_record, initialize_csv, read_matrix, write_records
from utils.errors import ContractError, DimensionMismatchError, ParameterError
from utils.metrics import SolveMetrics

logger = logging.getLogger(__name__)


def cmd_certify(cfg: CertifyConfig) -> Dict:
    """A posteriori certificate of a scenario CSV"""
    scenarios = ScenarioSet.from_csv(cfg.scenarios_path)
    summary = reduce(scenarios, cfg.tie_break)
    report = a_posteriori_certificate(scenarios, cfg.beta, cfg.tie_break)
    prior = apriori_eps(scenarios.n, scenarios.q, cfg.beta) if scenarios.n >= scenarios.q else None

    result = {
        "n": scenarios.n,
        "q": scenarios.q,
        "beta": cfg.beta,
        "sigma": summary.distinct_count,
        "epsilon": report.epsilon,
        "apriori_epsilon": prior,
        "dominant_indices": reports.index_list(summary.dominant_indices),
        "column_indices": reports.index_list(summary.indices),
    }

    reports.banner(f"A posteriori certificate: {cfg.scenarios_path}")
    reports.print_pairs([
        ["N (scenarios)", scenarios.n],
        ["q (constraints)", scenarios.q],
        ["beta", cfg.beta],
        ["tie-break", cfg.tie_break.value],
        ["sigma_N (distinct dominant)", summary.distinct_count],
        ["epsilon_{N,beta}(sigma_N)", report.epsilon],
        ["a priori epsilon (q terms)", prior],
    ])
    print(f"\nDominant scenarios: {result['dominant_indices']}")
    print(f"Per-constraint dominant index: {result['column_indices']}")
    reports.rule()

    if cfg.csv_path:
        write_records(cfg.csv_path, list(result), [result])
    return result


def cmd_size(cfg: SizeConfig) -> Dict:
    """Data-set size for (q, eps_bar, beta) in the requested mode"""
    spec = SizingSpec(q=cfg.q, eps_bar=cfg.eps_bar, beta=cfg.beta)

    if cfg.mode is SizeMode.INCREMENTAL_SCHEDULE:
        schedule = incremental_schedule(spec)
        fields = ["j", "m_bar", "beta_j", "n_j"]
        records = [dict(zip(fields, (j, m, repr(b), n))) for j, m, b, n in schedule.rows()]
        reports.print_csv(fields, records)
        if cfg.csv_path:
            write_records(cfg.csv_path, fields, records)
        return {"mode": cfg.mode.value, "schedule": schedule.rows()}

    oneshot = one_shot_size(spec)
    result = {"mode": cfg.mode.value, "q": cfg.q, "eps_bar": cfg.eps_bar, "beta": cfg.beta,
              "oneshot_n": oneshot}
    pairs = [["q", cfg.q], ["eps_bar", cfg.eps_bar], ["beta", cfg.beta], ["N (one-shot)", oneshot]]
    if cfg.mode is SizeMode.EPSBASED:
        eps_n = eps_based_size(spec)
        result.update({"epsbased_n": eps_n, "delta_n": eps_n - oneshot})
        pairs += [["N (eps-based)", eps_n], ["Delta N", eps_n - oneshot]]

    reports.banner(f"Data-set size ({cfg.mode.value})")
    reports.print_pairs(pairs)
    reports.rule()
    if cfg.csv_path:
        write_records(cfg.csv_path, list(result), [result])
    return result


_RUN_FIELDS = [
    "run", "seed", "j_stop", "n_used", "sigma", "objective", "epsilon",
    "empirical_risk", "oneshot_n", "oneshot_sigma", "oneshot_epsilon", "oneshot_risk",
]


def _demand_b(path: str, horizon: int) -> np.ndarray:
    return -DemandData.from_csv(path, horizon).profiles


def _write_solution(path: str, result, scenario_kind: str):
    doc = {
        "scenario_kind": scenario_kind,
        "g_values": result.decision.g_values.tolist(),
        "xi": result.summary.xi_star.tolist(),
        "objective": None if np.isnan(result.objective) else result.objective,
        "n_used": result.n_used,
        "j_stop": result.j_stop,
    }
    if isinstance(result.payload, UcSolution):
        doc["total_generation"] = result.payload.total_generation().tolist()
        doc["power"] = result.payload.power.tolist()
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)


def cmd_run_incremental(cfg: RunIncrementalConfig) -> Dict:
    """Staged data collection on the unit-commitment problem"""
    inst = load_instance(cfg.units_path)
    spec = SizingSpec(q=inst.horizon, eps_bar=cfg.eps_bar, beta=cfg.beta)
    schedule = incremental_schedule(spec)
    metrics = SolveMetrics()

    if cfg.export_lp:
        solver = LpExportSolver(inst, cfg.export_lp, metrics)
    elif cfg.convex_only:
        solver = ConvexReductionSolver(metrics)
    else:
        solver = UcReducedSolver(inst, cfg.gap_tol, cfg.node_limit, metrics)

    validation = _demand_b(cfg.validation_csv, inst.horizon) if cfg.validation_csv else None
    if validation is not None and validation.shape[0] == 0:
        raise ParameterError(f"{cfg.validation_csv}: validation set has no rows")
    demand_model = DemandModel(inst.horizon, base=cfg.base, daily_amp=cfg.daily_amp,
                               noise_sd=cfg.noise_sd, season_amp=cfg.season_amp, day_sd=cfg.day_sd)

    if cfg.csv_path:
        initialize_csv(cfg.csv_path, _RUN_FIELDS)

    records: List[Dict] = []
    last = None
    for run in range(cfg.runs):
        seed = cfg.seed + run
        if cfg.demand_csv:
            source = ArraySource(_demand_b(cfg.demand_csv, inst.horizon))
        else:
            source = GeneratorSource(inst.horizon, demand_model.sample_b, seed)

        with metrics.phase("incremental"):
            if cfg.compare_oneshot:
                comparison = run_with_oneshot_comparison(spec, source, solver, validation, schedule)
                result = comparison.incremental
            else:
                comparison = None
                result = run_incremental(spec, source, solver, schedule)

        record = {
            "run": run + 1, "seed": seed, "j_stop": result.j_stop, "n_used": result.n_used,
            "sigma": result.summary.distinct_count, "objective": result.objective,
            "epsilon": result.a_posteriori_eps(cfg.beta),
            "empirical_risk": (empirical_risk(result.decision, validation)
                               if validation is not None else None),
            "oneshot_n": None, "oneshot_sigma": None, "oneshot_epsilon": None, "oneshot_risk": None,
        }
        if comparison is not None:
            record.update({
                "oneshot_n": comparison.oneshot_n,
                "oneshot_sigma": comparison.oneshot_summary.distinct_count,
                "oneshot_epsilon": comparison.oneshot_eps,
                "oneshot_risk": comparison.oneshot_risk,
            })
        records.append(record)
        last = result
        if cfg.csv_path:
            append_record(cfg.csv_path, _RUN_FIELDS, record)
        logger.info("run %d: j_stop=%d n_used=%d", run + 1, result.j_stop, result.n_used)

    if cfg.solution_out:
        _write_solution(cfg.solution_out, last, "demand")

    reports.banner(f"Incremental run: q={spec.q}, eps_bar={cfg.eps_bar}, beta={cfg.beta}")
    if cfg.runs == 1:
        print("Iteration trace:")
        reports.print_table([[r.j, r.n_j, r.sigma] for r in last.trace], ["j", "N_j", "sigma"])
        print()
        pairs = [["j_stop", last.j_stop], ["n_used", last.n_used],
                 ["N_q (worst case)", int(schedule.n_j[-1])],
                 ["objective", last.objective], ["a posteriori epsilon", records[0]["epsilon"]],
                 ["empirical risk", records[0]["empirical_risk"]]]
        if cfg.compare_oneshot:
            pairs += [["one-shot N", records[0]["oneshot_n"]],
                      ["one-shot epsilon", records[0]["oneshot_epsilon"]],
                      ["one-shot empirical risk", records[0]["oneshot_risk"]]]
        reports.print_pairs(pairs)
        if cfg.export_lp:
            print(f"\nLP model written to {cfg.export_lp}; no solve attempted")
    else:
        used = np.array([r["n_used"] for r in records])
        oneshot = one_shot_size(spec)
        reports.print_pairs([
            ["runs", cfg.runs], ["n_used min", int(used.min())],
            ["n_used median", float(np.median(used))], ["n_used max", int(used.max())],
            ["one-shot N", oneshot], ["runs below one-shot N", int(np.sum(used < oneshot))],
        ])
    print()
    reports.print_pairs(reports.metrics_pairs(metrics.get_summary()), headers=("metric", "value"))
    reports.rule()
    return {"runs": records, "metrics": metrics.get_summary(), "schedule": schedule.rows()}


def _load_solution(path: str) -> Dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if "g_values" not in doc:
        if "total_generation" not in doc:
            raise ParameterError(f"{path}: needs 'g_values' or 'total_generation'")
        doc["g_values"] = [-v for v in doc["total_generation"]]
    return doc


def _risk_rows(path: str, demand: bool) -> np.ndarray:
    if demand:
        return -DemandData.from_csv(path).profiles
    return read_matrix(path)[1]


def cmd_risk(cfg: RiskConfig) -> Dict:
    """Empirical risk of a stored decision, with the dominance check against xi*"""
    doc = _load_solution(cfg.solution_path)
    decision = Decision(doc["g_values"])
    demand = doc.get("scenario_kind", "b_values") == "demand"
    validation = _risk_rows(cfg.validation_csv, demand)
    if validation.shape[1] != decision.q:
        raise DimensionMismatchError(
            f"{cfg.validation_csv} has {validation.shape[1]} columns, decision has {decision.q}"
        )
    risk = empirical_risk(decision, validation)
    result = {"n_validation": validation.shape[0], "empirical_risk": risk,
              "reduction_risk": None, "dominance_ok": None, "dominance_exceptions": None,
              "gap_rows": None}

    reference = None
    if cfg.training_csv:
        summary = reduce(ScenarioSet(_risk_rows(cfg.training_csv, demand)))
        reference = summary.as_decision()
        try:
            result["dominance_ok"] = dominance_check(decision, summary, validation)
            result["gap_rows"] = int(dominance_gap_rows(decision, summary, validation).size)
        except ContractError as exc:
            print(f"note: dominance check skipped: {exc}")
    elif doc.get("xi") is not None:
        reference = Decision(doc["xi"])
    if reference is not None:
        result["reduction_risk"] = empirical_risk(reference, validation)
        result["dominance_exceptions"] = int(np.count_nonzero(
            violation_mask(decision, validation) & ~violation_mask(reference, validation)))

    reports.banner(f"Empirical risk: {cfg.solution_path}")
    reports.print_pairs([
        ["validation scenarios", result["n_validation"]],
        ["risk of decision", reports.percent(risk)],
        ["risk of xi*", reports.percent(result["reduction_risk"])],
        ["rows violated by decision only", result["dominance_exceptions"]],
        ["rows violated by xi* only", result["gap_rows"]],
        ["dominance holds", result["dominance_ok"]],
    ])
    reports.rule()
    if cfg.csv_path:
        write_records(cfg.csv_path, list(result), [result])
    return result


def cmd_support(cfg: SupportConfig) -> Dict:
    """Greedy support list next to the convex-reduction complexity"""
    metrics = SolveMetrics()
    inst = None if cfg.convex_only else load_instance(cfg.units_path)
    data = DemandData.from_csv(cfg.demand_csv, None if inst is None else inst.horizon)

    validation: Optional[DemandData] = None
    if cfg.validation_fraction > 0.0:
        data, validation = split_train_validation(data, cfg.seed, cfg.validation_fraction)
    elif cfg.validation_csv:
        validation = DemandData.from_csv(cfg.validation_csv, data.horizon)

    scenarios = ScenarioSet(-data.profiles)
    if inst is None:
        oracle = ConvexReductionOracle(scenarios, metrics)
    else:
        check_solver_cap(inst)
        oracle = UcSupportOracle(inst, scenarios.b_values, cfg.gap_tol, cfg.node_limit, metrics)

    with metrics.phase("greedy support"):
        support = greedy_support(scenarios.n, oracle, cfg.equality_tol)
    summary = reduce(scenarios)
    sigma = summary.distinct_count

    risk = None
    if validation is not None and validation.n_days:
        decision = oracle.decision_of(oracle(list(range(scenarios.n))))
        risk = empirical_risk(decision, -validation.profiles)
    bounds = compare_bounds(scenarios.n, scenarios.q, cfg.beta, support.s_star, sigma, risk)

    result = {
        "n": scenarios.n, "q": scenarios.q, "beta": cfg.beta,
        "s_star": support.s_star, "sigma": sigma,
        "gap": complexity_gap(support.s_star, sigma),
        "solve_count": support.solve_count, "oracle_calls": support.oracle_calls,
        "apriori_epsilon": bounds.apriori_eps, "sigma_epsilon": bounds.sigma_eps,
        "s_star_epsilon": bounds.s_star_eps, "empirical_risk": risk,
        "support_list": reports.index_list(support.kept_indices),
        "dominant_indices": reports.index_list(summary.dominant_indices),
    }

    reports.banner(f"Support list: {cfg.demand_csv}"
                   + (" (convex reduction)" if inst is None else ""))
    reports.print_pairs([
        ["N", scenarios.n], ["q", scenarios.q],
        ["s*_N (greedy)", support.s_star], ["sigma_N", sigma], ["gap sigma - s*", result["gap"]],
        ["solve count", support.solve_count],
    ])
    print(f"\nSupport list: {result['support_list']}")
    print(f"Dominant scenarios: {result['dominant_indices']}\n")
    reports.print_table(
        [["a priori (q)", scenarios.q, bounds.apriori_eps],
         ["a posteriori (sigma_N)", sigma, bounds.sigma_eps],
         ["a posteriori (s*_N)", support.s_star, bounds.s_star_eps]],
        ["bound", "complexity", f"epsilon (beta={cfg.beta})"],
    )
    if risk is not None:
        print(f"\nEmpirical risk on {validation.n_days} validation days: {reports.percent(risk)}")
    print()
    reports.print_pairs(reports.metrics_pairs(metrics.get_summary()), headers=("metric", "value"))
    reports.rule()
    if cfg.csv_path:
        write_records(cfg.csv_path, list(result), [result])
    return result


def cmd_gen_demand(cfg: GenDemandConfig) -> Dict:
    """Write a synthetic demand CSV and print per-hour statistics"""
    data = synth_demand(cfg.seed, cfg.n_days, t=cfg.t, base=cfg.base, daily_amp=cfg.daily_amp,
                        noise_sd=cfg.noise_sd, season_amp=cfg.season_amp, day_sd=cfg.day_sd)
    out_dir = os.path.dirname(cfg.out_path)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    data.to_csv(cfg.out_path)

    stats = data.hourly_stats()
    reports.banner(f"Synthetic demand: {cfg.n_days} days x {cfg.t} slots -> {cfg.out_path}")
    if data.n_days:
        reports.print_table(
            [[h, stats["min"][h], stats["mean"][h], stats["max"][h]] for h in range(cfg.t)],
            ["hour", "min (GW)", "mean (GW)", "max (GW)"],
        )
    else:
        print("No days requested: header-only file written")
    reports.rule()
    return {"path": cfg.out_path, "n_days": data.n_days,
            "mean": stats["mean"].tolist()}
