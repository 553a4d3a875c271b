"""
Greedy irreducible support lists and the bounds they lead to
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence

import numpy as np

from certificates.certmath import apriori_eps, eps_n_beta
from certificates.scenario_core import Decision, ScenarioSet
from utils.errors import ParameterError, SupportSearchError
from utils.metrics import SolveMetrics

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolutionRecord:
    """Solution of the scenario program restricted to some scenarios"""
    continuous: np.ndarray
    binaries: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    objective: float = 0.0


class SolveOracle(Protocol):
    """Deterministic solve of the scenario program on a list of scenario indices"""

    def __call__(self, indices: List[int]) -> SolutionRecord:
        ...


@dataclass(frozen=True)
class SupportResult:
    kept_indices: List[int]
    s_star: int
    solve_count: int
    redundant_indices: List[int] = field(default_factory=list)

    @property
    def oracle_calls(self) -> int:
        """solve_count plus the reference solve on the full list"""
        return self.solve_count + 1


def solutions_equal(a: SolutionRecord, b: SolutionRecord, tol: float) -> bool:
    """
    Binaries exactly, continuous parts within tol (max-norm), objective within tol relative

    Non-finite continuous entries must coincide exactly.
    """
    if not np.array_equal(a.binaries, b.binaries):
        return False
    xa = np.asarray(a.continuous, dtype=float)
    xb = np.asarray(b.continuous, dtype=float)
    if xa.shape != xb.shape:
        return False
    finite = np.isfinite(xa) & np.isfinite(xb)
    if not np.array_equal(xa[~finite], xb[~finite]):
        return False
    if finite.any() and float(np.max(np.abs(xa[finite] - xb[finite]))) > tol:
        return False
    scale = max(1.0, abs(a.objective), abs(b.objective))
    return abs(a.objective - b.objective) <= tol * scale


class ConvexReductionOracle:
    """Oracle for the convex reduction: the solution is the column minimum of the kept rows"""

    def __init__(self, scenarios: ScenarioSet, metrics: Optional[SolveMetrics] = None):
        self.scenarios = scenarios
        self.metrics = metrics

    def __call__(self, indices: List[int]) -> SolutionRecord:
        if self.metrics is not None:
            self.metrics.add_solve("convex-reduction")
        if not indices:
            return SolutionRecord(continuous=np.full(self.scenarios.q, np.inf))
        rows = self.scenarios.b_values[np.asarray(indices, dtype=int)]
        return SolutionRecord(continuous=rows.min(axis=0))

    def decision_of(self, record: SolutionRecord) -> Decision:
        return Decision(record.continuous)


def _call(oracle: SolveOracle, indices: List[int], position: int,
          kept: Sequence[int], solve_count: int) -> SolutionRecord:
    try:
        return oracle(list(indices))
    except Exception as exc:
        raise SupportSearchError(position, list(kept), solve_count, exc) from exc


def greedy_support(n: int, oracle: SolveOracle, equality_tol: float = 1e-6,
                   verify: bool = False) -> SupportResult:
    """
    Reduce the full scenario list to an irreducible support list

    Scenarios are visited in index order; each is dropped for good if the
    solution without it equals the full-list solution, and reinstated
    otherwise. The list may become empty, so the oracle must accept [].
    With verify=True every kept index is re-tested on the final list and the
    ones that turn out removable are reported, not removed.
    """
    if n < 1:
        raise ParameterError(f"greedy support needs n >= 1, got {n}")
    kept = list(range(n))
    reference = _call(oracle, kept, -1, kept, 0)
    solve_count = 0

    for position in range(n):
        trial = [i for i in kept if i != position]
        candidate = _call(oracle, trial, position, kept, solve_count)
        solve_count += 1
        if solutions_equal(candidate, reference, equality_tol):
            kept = trial
            logger.debug("scenario %d discarded (%d left)", position, len(kept))
        else:
            logger.debug("scenario %d kept", position)

    redundant: List[int] = []
    if verify:
        for position in list(kept):
            trial = [i for i in kept if i != position]
            candidate = _call(oracle, trial, position, kept, solve_count)
            solve_count += 1
            if solutions_equal(candidate, reference, equality_tol):
                redundant.append(position)
        if redundant:
            logger.warning("kept list is not irreducible: %s removable", redundant)

    return SupportResult(kept_indices=kept, s_star=len(kept), solve_count=solve_count,
                         redundant_indices=redundant)


def complexity_gap(s_star: int, sigma: int) -> int:
    """sigma - s_star; non-negative when both come from the same problem and data"""
    if s_star < 0 or sigma < 0:
        raise ParameterError(f"complexities must be non-negative, got s*={s_star}, sigma={sigma}")
    return sigma - s_star


@dataclass(frozen=True)
class BoundComparison:
    n: int
    q: int
    beta: float
    s_star: int
    sigma: int
    apriori_eps: Optional[float]
    sigma_eps: float
    s_star_eps: float
    empirical_risk: Optional[float] = None


def compare_bounds(n: int, q: int, beta: float, s_star: int, sigma: int,
                   empirical_risk: Optional[float] = None) -> BoundComparison:
    """A priori bound next to the a posteriori bounds from sigma_N and from s*_N"""
    prior = apriori_eps(n, q, beta) if n >= q else None
    return BoundComparison(
        n=n, q=q, beta=beta, s_star=s_star, sigma=sigma, apriori_eps=prior,
        sigma_eps=eps_n_beta(n, beta, sigma), s_star_eps=eps_n_beta(n, beta, s_star),
        empirical_risk=empirical_risk,
    )
