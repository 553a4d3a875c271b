"""
Incremental data collection: scenario sources, reduced solvers and the staged driver
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Union

import numpy as np

from certificates.certmath import eps_n_beta
from certificates.scenario_core import (
    Decision,
    DominanceSummary,
    ScenarioSet,
    empirical_risk,
    reduce,
)
from sizing.schedule import IncrementalSchedule, SizingSpec, incremental_schedule, one_shot_size
from utils.csv_io import read_matrix
from utils.errors import ContractError, DataInsufficiencyError, DimensionMismatchError
from utils.metrics import SolveMetrics

logger = logging.getLogger(__name__)


class ScenarioSource(ABC):
    """Pull interface over a stream of scenario rows; never re-issues a row"""

    def __init__(self, q: int):
        self.q = q
        self.issued = 0

    def pull(self, count: int) -> np.ndarray:
        """Next `count` rows as a (count, q) matrix"""
        if count <= 0:
            return np.empty((0, self.q))
        rows = np.asarray(self._next_rows(count), dtype=float)
        if rows.shape != (count, self.q):
            raise DimensionMismatchError(
                f"source produced shape {rows.shape}, expected {(count, self.q)}"
            )
        self.issued += count
        return rows

    def available(self) -> Optional[int]:
        """Rows still obtainable, or None for an unbounded stream"""
        return None

    @abstractmethod
    def _next_rows(self, count: int) -> np.ndarray:
        ...


class ArraySource(ScenarioSource):
    """Finite source consuming the rows of a matrix (or CSV file) in order"""

    def __init__(self, b_values: np.ndarray):
        matrix = np.asarray(b_values, dtype=float)
        if matrix.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-D matrix, got shape {matrix.shape}")
        super().__init__(matrix.shape[1])
        self._rows = matrix

    @classmethod
    def from_csv(cls, path: str, transform: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        _, matrix = read_matrix(path)
        return cls(transform(matrix) if transform else matrix)

    def available(self) -> int:
        return self._rows.shape[0] - self.issued

    def _next_rows(self, count: int) -> np.ndarray:
        if count > self.available():
            raise DataInsufficiencyError(needed=self.issued + count, available=self._rows.shape[0])
        return self._rows[self.issued:self.issued + count]


class GeneratorSource(ScenarioSource):
    """Unbounded seeded stream; draw(rng, count) must return (count, q) i.i.d. rows"""

    def __init__(self, q: int, draw: Callable[[np.random.Generator, int], np.ndarray], seed: int):
        super().__init__(q)
        self._draw = draw
        self._rng = np.random.default_rng(seed)

    def _next_rows(self, count: int) -> np.ndarray:
        return self._draw(self._rng, count)


@dataclass(frozen=True)
class ReducedSolution:
    """Output of a reduced solve: constraint image, objective and optional payload"""
    decision: Decision
    objective: float
    payload: object = None


class ReducedSolver(Protocol):
    """Maps right-hand sides xi to a decision satisfying g(x) <= xi"""

    def __call__(self, xi: np.ndarray) -> ReducedSolution:
        ...


class ConvexReductionSolver:
    """The reduced problem whose solution is xi itself"""

    def __init__(self, metrics: Optional[SolveMetrics] = None):
        self.metrics = metrics

    def __call__(self, xi: np.ndarray) -> ReducedSolution:
        if self.metrics is not None:
            self.metrics.add_solve("convex-reduction")
        return ReducedSolution(decision=Decision(xi), objective=0.0)


@dataclass(frozen=True)
class IterationRecord:
    j: int
    n_j: int
    sigma: int


@dataclass
class IncrementalResult:
    decision: Decision
    n_used: int
    j_stop: int
    objective: float
    summary: DominanceSummary
    scenarios: ScenarioSet
    trace: List[IterationRecord] = field(default_factory=list)
    payload: object = None
    # every row pulled from the source, in stream order; the first n_used are `scenarios`
    drawn: Optional[np.ndarray] = None

    def a_posteriori_eps(self, beta: float) -> float:
        return eps_n_beta(self.n_used, beta, self.summary.distinct_count)


def _checked(solution: ReducedSolution, xi: np.ndarray) -> ReducedSolution:
    excess = float(np.max(solution.decision.g_values - xi))
    if excess > 0.0:
        raise ContractError(f"reduced solver returned g exceeding xi by {excess:.3g}")
    return solution


def run_incremental(spec: SizingSpec, source: ScenarioSource, solver: ReducedSolver,
                    schedule: Optional[IncrementalSchedule] = None) -> IncrementalResult:
    """
    Staged collection and solve

    Starting at j = 0, gather rows up to N_j, reduce them and stop as soon as
    the number of distinct dominant indices is at most j; the reduced problem
    is then solved on xi*. Terminates by j = q since sigma <= q.
    """
    if source.q != spec.q:
        raise DimensionMismatchError(f"source has {source.q} columns, spec has q={spec.q}")
    schedule = schedule if schedule is not None else incremental_schedule(spec)
    needed = int(schedule.n_j[-1])
    available = source.available()
    if available is not None and available < needed:
        raise DataInsufficiencyError(needed=needed, available=available)

    collected = np.empty((0, spec.q))
    trace: List[IterationRecord] = []
    for j in range(spec.q + 1):
        n_target = int(schedule.n_j[j])
        if n_target > collected.shape[0]:
            collected = np.vstack([collected, source.pull(n_target - collected.shape[0])])
        scenarios = ScenarioSet(collected[:n_target])
        summary = reduce(scenarios)
        trace.append(IterationRecord(j=j, n_j=n_target, sigma=summary.distinct_count))
        logger.info("iteration j=%d: N_j=%d sigma=%d", j, n_target, summary.distinct_count)
        if summary.distinct_count <= j:
            solution = _checked(solver(summary.xi_star), summary.xi_star)
            return IncrementalResult(
                decision=solution.decision, n_used=n_target, j_stop=j,
                objective=solution.objective, summary=summary, scenarios=scenarios,
                trace=trace, payload=solution.payload, drawn=collected,
            )
    raise ContractError(
        f"no stopping iteration found up to j={spec.q}; sigma trace {[r.sigma for r in trace]}"
    )


@dataclass(frozen=True)
class OneShotComparison:
    """Incremental and one-shot decisions computed on the same data stream"""
    incremental: IncrementalResult
    oneshot_n: int
    oneshot_summary: DominanceSummary
    oneshot_solution: ReducedSolution
    incremental_eps: float
    oneshot_eps: float
    incremental_risk: Optional[float] = None
    oneshot_risk: Optional[float] = None


def run_with_oneshot_comparison(spec: SizingSpec, source: ScenarioSource, solver: ReducedSolver,
                                validation: Union[ScenarioSet, np.ndarray, None] = None,
                                schedule: Optional[IncrementalSchedule] = None) -> OneShotComparison:
    """
    Run the staged driver, then top the same stream up to the one-shot size and re-solve

    The first M rows of the stream feed the one-shot decision, M being the
    one-shot size for the same (q, eps_bar, beta). Rows the staged run drew
    but did not use are part of that prefix.
    """
    result = run_incremental(spec, source, solver, schedule)
    m = one_shot_size(spec)
    rows = result.drawn if result.drawn is not None else result.scenarios.b_values
    if rows.shape[0] < m:
        rows = np.vstack([rows, source.pull(m - rows.shape[0])])
    summary = reduce(ScenarioSet(rows[:m]))
    solution = _checked(solver(summary.xi_star), summary.xi_star)

    incremental_risk = oneshot_risk = None
    if validation is not None:
        incremental_risk = empirical_risk(result.decision, validation)
        oneshot_risk = empirical_risk(solution.decision, validation)
    return OneShotComparison(
        incremental=result, oneshot_n=m, oneshot_summary=summary, oneshot_solution=solution,
        incremental_eps=result.a_posteriori_eps(spec.beta),
        oneshot_eps=eps_n_beta(m, spec.beta, summary.distinct_count),
        incremental_risk=incremental_risk, oneshot_risk=oneshot_risk,
    )
