"""
Tests for the sizing rules, the incremental schedule and the staged driver
"""
import math

import numpy as np
import pytest

from certificates.certmath import eps_n_beta
from certificates.scenario_core import Decision
from sizing.incremental import (
    ArraySource,
    ConvexReductionSolver,
    GeneratorSource,
    ReducedSolution,
    run_incremental,
    run_with_oneshot_comparison,
)
from sizing.schedule import (
    IncrementalSchedule,
    SizingSpec,
    eps_based_size,
    incremental_schedule,
    one_shot_size,
    smallest_satisfying,
)
from test.helpers import print_test_header, print_test_result
from utils.errors import ContractError, DataInsufficiencyError, DimensionMismatchError
from utils.metrics import SolveMetrics

SMALL = SizingSpec(q=2, eps_bar=0.3, beta=0.1)


def brute_threshold(j: int, m_bar: int, beta_j: float, eps_bar: float) -> int:
    """First N > m_bar passing the stopping inequality, by plain summation in logs"""
    log_q = math.log1p(-eps_bar)
    terms = [math.log(math.comb(m, j)) + (m - j) * log_q for m in range(j, m_bar + 1)]
    top = max(terms)
    lhs = math.log(beta_j) + top + math.log(sum(math.exp(t - top) for t in terms))
    n = m_bar + 1
    while lhs < math.log(math.comb(n, j)) + (n - j) * log_q:
        n += 1
    return n


def uniform_draw(rng, count):
    return rng.uniform(0.0, 1.0, size=(count, SMALL.q))


class TestOneShot:
    """Test suite for one_shot_size and eps_based_size"""

    def test_case_study_sizes(self):
        print_test_header("one_shot_size - reference values")
        assert one_shot_size(SizingSpec(q=24, eps_bar=0.1, beta=1e-6)) == 533
        assert one_shot_size(SizingSpec(q=1, eps_bar=0.1, beta=1e-6)) == 132
        print_test_result(True, "533 and 132")

    def test_trivial_target(self):
        print_test_header("one_shot_size - q=1 with beta close to 1")
        assert one_shot_size(SizingSpec(q=1, eps_bar=0.5, beta=0.99)) == 1
        print_test_result(True)

    def test_exact_tie_counts_as_satisfied(self):
        print_test_header("one_shot_size - tail equal to beta at M = 1")
        # (1 - 0.5)^1 == 0.5
        assert one_shot_size(SizingSpec(q=1, eps_bar=0.5, beta=0.5)) == 1
        print_test_result(True)

    @pytest.mark.parametrize("eps_bar,beta", [(0.05, 1e-3), (0.2, 0.01), (0.3, 1e-6), (0.01, 0.05)])
    def test_single_constraint_closed_form(self, eps_bar, beta):
        print_test_header(f"one_shot_size - q=1 closed form (eps={eps_bar}, beta={beta})")
        expected = math.ceil(math.log(beta) / math.log1p(-eps_bar))
        assert one_shot_size(SizingSpec(q=1, eps_bar=eps_bar, beta=beta)) == expected
        print_test_result(True, f"M = {expected}")

    @pytest.mark.parametrize("q,eps_bar,beta", [(1, 0.5, 0.99), (2, 0.3, 0.05), (3, 0.2, 0.01)])
    def test_eps_based_matches_brute_force(self, q, eps_bar, beta):
        print_test_header(f"eps_based_size - brute force (q={q})")
        m = q
        while eps_n_beta(m, beta, q) > eps_bar:
            m += 1
        spec = SizingSpec(q=q, eps_bar=eps_bar, beta=beta)
        assert eps_based_size(spec) == m
        assert eps_based_size(spec) >= one_shot_size(spec)
        print_test_result(True, f"eps-based {m}, one-shot {one_shot_size(spec)}")

    def test_smallest_satisfying(self):
        print_test_header("smallest_satisfying - bracketing and bisection")
        assert smallest_satisfying(3, lambda m: m >= 3) == 3
        assert smallest_satisfying(3, lambda m: m >= 1000) == 1000
        assert smallest_satisfying(0, lambda m: m * m >= 50) == 8
        print_test_result(True)


class TestSchedule:
    """Test suite for incremental_schedule"""

    def test_single_constraint_rows(self):
        print_test_header("incremental_schedule - q=1")
        spec = SizingSpec(q=1, eps_bar=0.1, beta=1e-6)
        schedule = incremental_schedule(spec)
        assert schedule.q == 1
        assert schedule.m_bar.tolist() == [132, 132]
        assert schedule.beta_j[0] == pytest.approx(1e-6 / (2 * 133))
        # j = 0: geometric sum of (1-eps)^m for m = 0..132
        geometric = (1.0 - 0.9 ** 133) / 0.1
        n0 = math.ceil(math.log(schedule.beta_j[0] * geometric) / math.log(0.9))
        assert schedule.n_j[0] == n0
        assert schedule.n_j[1] == brute_threshold(1, 132, schedule.beta_j[1], 0.1)
        print_test_result(True, f"N_0 = {schedule.n_j[0]}, N_1 = {schedule.n_j[1]}")

    def test_rows_against_brute_force(self):
        print_test_header("incremental_schedule - q=4 against plain summation")
        spec = SizingSpec(q=4, eps_bar=0.2, beta=1e-3)
        schedule = incremental_schedule(spec)
        for j, m_bar, beta_j, n_j in schedule.rows():
            assert m_bar == one_shot_size(SizingSpec(q=max(j, 1), eps_bar=0.2, beta=1e-3))
            assert beta_j == pytest.approx(1e-3 / (5 * (m_bar + 1)))
            assert n_j > m_bar
            assert n_j == brute_threshold(j, m_bar, beta_j, 0.2)
        print_test_result(True, str(schedule.n_j.tolist()))

    def test_schedule_is_read_only(self):
        print_test_header("incremental_schedule - frozen arrays")
        schedule = incremental_schedule(SMALL)
        with pytest.raises(ValueError):
            schedule.n_j[0] = 1
        print_test_result(True)


class TestRunIncremental:
    """Test suite for the staged driver"""

    def test_single_constraint_stops_at_one(self):
        print_test_header("run_incremental - q=1")
        spec = SizingSpec(q=1, eps_bar=0.1, beta=1e-6)
        source = GeneratorSource(1, lambda rng, n: rng.uniform(size=(n, 1)), seed=3)
        result = run_incremental(spec, source, ConvexReductionSolver())
        schedule = incremental_schedule(spec)
        assert result.j_stop == 1
        assert result.n_used == schedule.n_j[1]
        assert [r.sigma for r in result.trace] == [1, 1]
        assert np.array_equal(result.decision.g_values, result.summary.xi_star)
        print_test_result(True, f"N used = {result.n_used}")

    def test_dominated_stream_stops_early(self):
        print_test_header("run_incremental - one row dominates the stream")
        schedule = incremental_schedule(SMALL)
        rng = np.random.default_rng(1)
        rows = 1.0 + rng.uniform(size=(int(schedule.n_j[-1]), 2))
        rows[0] = 0.0
        result = run_incremental(SMALL, ArraySource(rows), ConvexReductionSolver(), schedule)
        assert result.j_stop == 1
        assert result.n_used == schedule.n_j[1]
        assert result.summary.dominant_indices == [0]
        assert result.a_posteriori_eps(SMALL.beta) == eps_n_beta(result.n_used, SMALL.beta, 1)
        print_test_result(True)

    def test_data_insufficiency(self):
        print_test_header("run_incremental - finite source too short")
        schedule = incremental_schedule(SMALL)
        rows = np.ones((int(schedule.n_j[-1]) - 1, 2))
        with pytest.raises(DataInsufficiencyError) as exc:
            run_incremental(SMALL, ArraySource(rows), ConvexReductionSolver(), schedule)
        assert exc.value.needed == schedule.n_j[-1]
        print_test_result(True, str(exc.value))

    def test_solver_exceeding_xi(self):
        print_test_header("run_incremental - solver breaks g <= xi")

        def bad_solver(xi):
            return ReducedSolution(decision=Decision(xi + 1.0), objective=0.0)

        source = GeneratorSource(2, uniform_draw, seed=0)
        with pytest.raises(ContractError):
            run_incremental(SMALL, source, bad_solver)
        print_test_result(True)

    def test_reruns_are_deterministic(self):
        print_test_header("run_incremental - same seed, same run")
        first = run_incremental(SMALL, GeneratorSource(2, uniform_draw, seed=42), ConvexReductionSolver())
        second = run_incremental(SMALL, GeneratorSource(2, uniform_draw, seed=42), ConvexReductionSolver())
        assert first.n_used == second.n_used
        assert first.j_stop == second.j_stop
        assert np.array_equal(first.decision.g_values, second.decision.g_values)
        print_test_result(True)

    def test_metrics_count_one_solve(self):
        print_test_header("run_incremental - one reduced solve per run")
        metrics = SolveMetrics()
        run_incremental(SMALL, GeneratorSource(2, uniform_draw, seed=5), ConvexReductionSolver(metrics))
        assert metrics.get_summary()["solve_calls"] == 1
        print_test_result(True)

    def test_source_errors(self):
        print_test_header("scenario sources - shape checks")
        with pytest.raises(DimensionMismatchError):
            run_incremental(SMALL, GeneratorSource(3, lambda rng, n: np.zeros((n, 3)), seed=0),
                            ConvexReductionSolver())
        wrong = GeneratorSource(2, lambda rng, n: np.zeros((n, 3)), seed=0)
        with pytest.raises(DimensionMismatchError):
            wrong.pull(4)
        assert wrong.pull(0).shape == (0, 2)
        with pytest.raises(DimensionMismatchError):
            ArraySource(np.zeros(3))
        source = ArraySource(np.arange(6.0).reshape(3, 2))
        assert source.pull(2).tolist() == [[0.0, 1.0], [2.0, 3.0]]
        assert source.available() == 1
        with pytest.raises(DataInsufficiencyError):
            source.pull(2)
        print_test_result(True)


class TestOneShotComparison:
    """Test suite for run_with_oneshot_comparison"""

    def test_same_stream(self):
        print_test_header("run_with_oneshot_comparison - shared prefix")
        validation = np.random.default_rng(99).uniform(size=(400, 2))
        cmp = run_with_oneshot_comparison(SMALL, GeneratorSource(2, uniform_draw, seed=12),
                                          ConvexReductionSolver(), validation=validation)
        m = one_shot_size(SMALL)
        assert cmp.oneshot_n == m
        assert cmp.oneshot_eps == eps_n_beta(m, SMALL.beta, cmp.oneshot_summary.distinct_count)
        assert cmp.incremental_eps == cmp.incremental.a_posteriori_eps(SMALL.beta)
        assert 0.0 <= cmp.incremental_risk <= 1.0
        assert 0.0 <= cmp.oneshot_risk <= 1.0
        # both data sets are prefixes of one stream: the longer one has the smaller minima
        if cmp.incremental.n_used <= m:
            assert np.all(cmp.oneshot_summary.xi_star <= cmp.incremental.summary.xi_star)
        else:
            assert np.all(cmp.incremental.summary.xi_star <= cmp.oneshot_summary.xi_star)
        print_test_result(True, f"incremental N = {cmp.incremental.n_used}, one-shot M = {m}")

    def test_rows_drawn_past_n_used_are_reused(self):
        print_test_header("run_with_oneshot_comparison - unused rows of the staged run")
        # N_0 = 6 draws six rows; j = 1 stops on the first three
        schedule = IncrementalSchedule(m_bar=np.array([3, 3, 3]), beta_j=np.full(3, 0.01),
                                       n_j=np.array([6, 3, 3]))
        rows = np.full((12, 2), 0.95)
        rows[:3] = [[0.1, 0.1], [0.5, 0.6], [0.7, 0.8]]
        rows[3] = [0.05, 0.9]
        rows[8] = [0.9, 0.02]
        m = one_shot_size(SMALL)
        assert m == 12
        cmp = run_with_oneshot_comparison(SMALL, ArraySource(rows), ConvexReductionSolver(),
                                          schedule=schedule)
        assert cmp.incremental.n_used == 3
        assert cmp.incremental.j_stop == 1
        assert cmp.incremental.drawn.shape == (6, 2)
        assert cmp.oneshot_summary.xi_star.tolist() == [0.05, 0.02]
        assert cmp.oneshot_summary.indices.tolist() == [3, 8]
        print_test_result(True, f"one-shot M = {m} from a 12-row stream")
