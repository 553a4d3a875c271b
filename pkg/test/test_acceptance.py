"""
Property and statistical checks over randomized instances

These runs take minutes; deselect them with `pytest -m "not slow"`.
"""
import math

import numpy as np
import pytest

from certificates.certmath import eps_n_beta
from certificates.scenario_core import (
    ScenarioSet,
    dominance_check,
    reduce,
    risk_under_independence,
)
from certificates.support import greedy_support
from cli.solvers import UcReducedSolver, UcSupportOracle
from miqp.branch_and_bound import solve_bb
from miqp.enumeration import solve_enum
from miqp.model import MiqpBuilder, Relation, SolveStatus
from sizing.incremental import ConvexReductionSolver, GeneratorSource, run_incremental
from sizing.schedule import SizingSpec, eps_based_size, incremental_schedule, one_shot_size
from test.helpers import print_test_header, print_test_result
from ucp.demand import DemandModel
from ucp.units import GenUnit, UcInstance

pytestmark = pytest.mark.slow


def controlled_instance(rng: np.random.Generator, n_p: int, horizon: int) -> UcInstance:
    """
    Instance on which every demand between the summed minimum outputs and the
    summed capacities is servable with all units committed
    """
    units = []
    for j in range(n_p):
        p_min = float(rng.uniform(1.0, 3.0))
        cap = p_min + float(rng.uniform(4.0, 10.0))
        units.append(GenUnit(
            name=f"gu{j + 1}", a=float(rng.uniform(0.05, 0.5)), b=float(rng.uniform(0.2, 2.0)),
            c=float(rng.uniform(0.1, 1.0)), c_u=float(rng.uniform(0.1, 1.0)),
            c_d=float(rng.uniform(0.1, 1.0)), ramp_down=cap, ramp_up=cap,
            t_up=int(rng.integers(1, 3)), t_down=int(rng.integers(1, 3)),
            zones=((p_min, cap),),
        ))
    return UcInstance(units=tuple(units), horizon=horizon)


def demand_draws(rng: np.random.Generator, inst: UcInstance, count: int) -> np.ndarray:
    """Hourly demand strictly inside [sum p_min, sum capacity]"""
    low = sum(u.zones[0][0] for u in inst.units)
    high = inst.total_capacity
    margin = 0.05 * (high - low)
    return rng.uniform(low + margin, high - margin, size=(count, inst.horizon))


class TestCertificateFunctions:
    """Closed forms and monotonicity of the violation function"""

    @pytest.mark.parametrize("n,beta", [(10, 0.01), (100, 1e-4), (500, 1e-6)])
    def test_closed_forms(self, n, beta):
        print_test_header(f"eps_n_beta - closed forms (N={n}, beta={beta})")
        assert abs(eps_n_beta(1, beta, 0) - (1.0 - beta)) <= 1e-8
        assert abs(eps_n_beta(n, beta, n - 1) - (1.0 - beta / n ** 2)) <= 1e-8
        print_test_result(True)

    def test_monotone_in_k(self):
        print_test_header("eps_n_beta - non-decreasing over k = 0..500")
        values = [eps_n_beta(500, 1e-6, k) for k in range(501)]
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert values[-1] == 1.0
        print_test_result(True, f"eps(0) = {values[0]:.6g}, eps(24) = {values[24]:.6g}")

    @pytest.mark.parametrize("eps_bar", [0.02, 0.05, 0.1, 0.2, 0.3, 0.5])
    def test_eps_based_size_never_smaller(self, eps_bar):
        print_test_header(f"eps_based_size - Delta N >= 0 (q=100, eps_bar={eps_bar})")
        spec = SizingSpec(q=100, eps_bar=eps_bar, beta=1e-6)
        delta = eps_based_size(spec) - one_shot_size(spec)
        assert delta >= 0
        print_test_result(True, f"Delta N = {delta}")


class TestUnitCommitmentProperties:
    """Dominance and support-list ordering on randomized desk instances"""

    def test_per_sample_dominance(self):
        print_test_header("UC decision vs xi* - 50 instances, 500 validation rows each")
        rng = np.random.default_rng(2024)
        exceptions = 0
        for trial in range(50):
            n_p = int(rng.integers(1, 4))
            horizon = {1: 8, 2: 6, 3: 4}[n_p]
            inst = controlled_instance(rng, n_p, horizon)
            summary = reduce(ScenarioSet(-demand_draws(rng, inst, 200)))
            solution = UcReducedSolver(inst, gap_tol=1e-6)(summary.xi_star)
            validation = -demand_draws(rng, inst, 500)
            if not dominance_check(solution.decision, summary, validation):
                exceptions += 1
        assert exceptions == 0
        print_test_result(True)

    def test_greedy_support_matches_sigma(self):
        print_test_header("greedy support on UC - s* = sigma when demand rows bind")
        rng = np.random.default_rng(7)
        for trial in range(20):
            n_p = int(rng.integers(1, 3))
            inst = controlled_instance(rng, n_p, 4)
            b = -demand_draws(rng, inst, 12)
            sigma = reduce(ScenarioSet(b)).distinct_count
            support = greedy_support(12, UcSupportOracle(inst, b, gap_tol=1e-9), equality_tol=1e-6)
            assert support.s_star <= sigma <= inst.horizon
            assert support.s_star == sigma
        print_test_result(True)


def random_miqp(rng: np.random.Generator, n_bin: int):
    """Two or three continuous variables switched by binaries, one demand-like row"""
    n_cont = int(rng.integers(2, 4))
    mb = MiqpBuilder("random")
    for i in range(n_cont):
        mb.add_continuous(f"x{i}", lower=0.0, upper=10.0,
                          quad=float(rng.uniform(0.1, 1.0)), lin=float(rng.uniform(-2.0, 2.0)))
    for k in range(n_bin):
        mb.add_binary(f"y{k}", lin=float(rng.uniform(-1.0, 2.0)))
    for i in range(n_cont):
        mb.add_row([(i, 1.0), (n_cont + i % n_bin, -10.0)], Relation.LE, 0.0, f"link{i}")
    mb.add_row([(i, 1.0) for i in range(n_cont)], Relation.GE, float(rng.uniform(0.0, 12.0)), "need")
    subset = rng.choice(n_bin, size=int(rng.integers(2, n_bin + 1)), replace=False)
    if rng.uniform() < 0.5:
        mb.add_row([(n_cont + int(k), 1.0) for k in subset], Relation.LE, len(subset) - 1, "cap")
    else:
        mb.add_row([(n_cont + int(k), 1.0) for k in subset], Relation.GE, 1.0, "cover")
    return mb.build()


class TestSolverEquivalence:
    """Branch-and-bound against exhaustive enumeration"""

    def test_random_models(self):
        print_test_header("solve_bb vs solve_enum - 200 random models")
        rng = np.random.default_rng(99)
        infeasible = 0
        for trial in range(200):
            model = random_miqp(rng, int(rng.integers(3, 11)))
            bb = solve_bb(model, gap_tol=1e-9)
            enum = solve_enum(model)
            assert bb.status in (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE)
            assert bb.status is enum.status
            if enum.status is SolveStatus.INFEASIBLE:
                infeasible += 1
                continue
            assert abs(bb.objective - enum.objective) <= 1e-6 * max(1.0, abs(enum.objective))
            assert model.violated_rows(bb.assignment, tol=1e-6) == []
        print_test_result(True, f"{infeasible} infeasible models")


class TestIncrementalRuns:
    """Staged collection on synthetic streams"""

    def test_fewer_rows_than_one_shot(self):
        print_test_header("run_incremental - 100 synthetic demand streams, q = 24")
        spec = SizingSpec(q=24, eps_bar=0.1, beta=1e-6)
        schedule = incremental_schedule(spec)
        oneshot = one_shot_size(spec)
        demand = DemandModel(24)
        used = []
        for seed in range(100):
            source = GeneratorSource(24, demand.sample_b, seed)
            result = run_incremental(spec, source, ConvexReductionSolver(), schedule)
            assert result.n_used <= schedule.n_j[-1]
            used.append(result.n_used)
        below = sum(n < oneshot for n in used)
        print(f"n_used: min {min(used)}, median {int(np.median(used))}, max {max(used)}")
        assert below >= 80
        print_test_result(True, f"{below}/100 runs below {oneshot}")

    def test_coverage(self):
        print_test_header("run_incremental - risk coverage over 2000 runs")
        spec = SizingSpec(q=4, eps_bar=0.2, beta=0.05)
        schedule = incremental_schedule(spec)
        low, high = 20.0, 30.0

        def draw(rng, count):
            return -rng.uniform(low, high, size=(count, spec.q))

        def survival(g):
            # P(b >= g) = P(demand <= -g) for uniform hourly demand
            return np.clip((-np.asarray(g) - low) / (high - low), 0.0, 1.0)

        runs = 2000
        exceed = 0
        for seed in range(runs):
            result = run_incremental(spec, GeneratorSource(spec.q, draw, seed),
                                     ConvexReductionSolver(), schedule)
            if risk_under_independence(result.decision, survival) > spec.eps_bar:
                exceed += 1
        limit = spec.beta + 3.0 * math.sqrt(spec.beta * (1.0 - spec.beta) / runs)
        print(f"risk above {spec.eps_bar} in {exceed}/{runs} runs (limit {limit:.4f})")
        assert exceed / runs <= limit
        print_test_result(True)

