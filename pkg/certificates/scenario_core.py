"""
Scenario sets, the convex reduction xi*_N and the risk certificates built on it

A decision enters this module only through its constraint image g(x):
every certificate for g(x) <= b(delta) depends on x through g(x) alone.
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from certificates.certmath import apriori_eps, eps_n_beta
from utils.config import TieBreak
from utils.csv_io import read_matrix
from utils.errors import (
    ContractError,
    DimensionMismatchError,
    EmptyScenarioSetError,
    ParameterError,
)

logger = logging.getLogger(__name__)

# exhaustive minimum-hitting-set search is attempted up to this many tied columns
MAX_TIED_COLUMNS = 20


def _frozen(values, ndim: int, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"{what} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScenarioSet:
    """N x q matrix of right-hand sides b_l(delta_i)"""
    b_values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.b_values, dtype=float, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"scenario matrix must be 2-D, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise EmptyScenarioSetError("scenario set has no rows")
        if arr.shape[1] == 0:
            raise DimensionMismatchError("scenario set has no columns")
        object.__setattr__(self, "b_values", _frozen(arr, 2, "scenario matrix"))

    @property
    def n(self) -> int:
        return self.b_values.shape[0]

    @property
    def q(self) -> int:
        return self.b_values.shape[1]

    def subset(self, indices: Sequence[int]) -> "ScenarioSet":
        return ScenarioSet(self.b_values[np.asarray(indices, dtype=int)])

    @classmethod
    def from_csv(cls, path: str) -> "ScenarioSet":
        _, matrix = read_matrix(path)
        if matrix.shape[0] == 0:
            raise EmptyScenarioSetError(f"{path}: no scenario rows")
        return cls(matrix)


@dataclass(frozen=True)
class DominanceSummary:
    """xi*_N, the dominant index i_l of every column, and their distinct count"""
    xi_star: np.ndarray
    indices: np.ndarray
    distinct_count: int

    def __post_init__(self):
        object.__setattr__(self, "xi_star", _frozen(self.xi_star, 1, "xi_star"))
        idx = np.array(self.indices, dtype=int, copy=True)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def dominant_indices(self) -> List[int]:
        """Sorted distinct scenario indices (I_N as a set)"""
        return sorted(set(int(i) for i in self.indices))

    def as_decision(self) -> "Decision":
        return Decision(self.xi_star)


@dataclass(frozen=True)
class Decision:
    """Constraint image g(x) of a candidate decision"""
    g_values: np.ndarray = field()

    def __post_init__(self):
        object.__setattr__(self, "g_values", _frozen(self.g_values, 1, "decision image"))

    @property
    def q(self) -> int:
        return self.g_values.shape[0]


class CertificateKind(str, Enum):
    A_POSTERIORI = "APosteriori"
    A_PRIORI = "APriori"


class CertificateReport(BaseModel):
    """Risk bound epsilon holding with confidence 1 - beta"""
    model_config = ConfigDict(frozen=True)

    kind: CertificateKind
    epsilon: float = Field(..., ge=0.0, le=1.0)
    beta: float = Field(..., gt=0.0, lt=1.0)
    n: int = Field(..., ge=1)
    complexity_used: Optional[int] = None


def _tie_sets(b: np.ndarray, xi_star: np.ndarray) -> List[np.ndarray]:
    return [np.flatnonzero(b[:, col] == xi_star[col]) for col in range(b.shape[1])]


def _min_complexity_indices(b: np.ndarray, xi_star: np.ndarray,
                            first: np.ndarray) -> np.ndarray:
    ties = _tie_sets(b, xi_star)
    forced = {int(t[0]) for t in ties if t.size == 1}
    open_cols = [c for c, t in enumerate(ties)
                 if t.size > 1 and not forced.intersection(t.tolist())]
    if not open_cols:
        chosen = forced
    elif len(open_cols) > MAX_TIED_COLUMNS:
        logger.warning(
            "%d tied columns exceed the exhaustive limit of %d; "
            "falling back to the smallest-index tie-break",
            len(open_cols), MAX_TIED_COLUMNS,
        )
        return first
    else:
        # rows with the same coverage of the open columns are interchangeable
        cover = {}
        for bit, col in enumerate(open_cols):
            for row in ties[col].tolist():
                cover[row] = cover.get(row, 0) | (1 << bit)
        by_mask = {}
        for row in sorted(cover):
            by_mask.setdefault(cover[row], row)
        candidates = sorted(by_mask.items(), key=lambda item: item[1])
        full = (1 << len(open_cols)) - 1
        best = None
        for size in range(1, len(open_cols) + 1):
            for combo in itertools.combinations(candidates, size):
                mask = 0
                for m, _ in combo:
                    mask |= m
                if mask == full:
                    best = [row for _, row in combo]
                    break
            if best is not None:
                break
        chosen = forced.union(best)

    out = np.empty(b.shape[1], dtype=int)
    for col, t in enumerate(ties):
        out[col] = min(int(r) for r in t.tolist() if int(r) in chosen)
    return out


def reduce(s: ScenarioSet, tie_break: Union[TieBreak, str] = TieBreak.SMALLEST_INDEX) -> DominanceSummary:
    """
    Convex reduction of a scenario set

    xi_star[l] is the column minimum of b; indices[l] the scenario attaining
    it, the smallest index on exact ties. With tie_break='min_complexity'
    ties are resolved to minimise the number of distinct indices instead.
    """
    tie_break = TieBreak(tie_break)
    b = s.b_values
    xi_star = b.min(axis=0)
    indices = np.argmin(b, axis=0)
    if tie_break is TieBreak.MIN_COMPLEXITY:
        indices = _min_complexity_indices(b, xi_star, indices)
    distinct = int(np.unique(indices).size)
    return DominanceSummary(xi_star=xi_star, indices=indices, distinct_count=distinct)


def a_posteriori_certificate(s: ScenarioSet, beta: float,
                             tie_break: Union[TieBreak, str] = TieBreak.SMALLEST_INDEX) -> CertificateReport:
    """epsilon = eps_{N,beta}(sigma_N) with sigma_N the number of distinct dominant indices"""
    summary = reduce(s, tie_break)
    eps = eps_n_beta(s.n, beta, summary.distinct_count)
    return CertificateReport(
        kind=CertificateKind.A_POSTERIORI, epsilon=eps, beta=beta,
        n=s.n, complexity_used=summary.distinct_count,
    )


def a_priori_certificate(n: int, q: int, beta: float) -> CertificateReport:
    """Data-independent bound from the binomial tail with q terms"""
    if n < q:
        raise ParameterError(f"a priori certificate needs n >= q, got n={n}, q={q}")
    return CertificateReport(
        kind=CertificateKind.A_PRIORI, epsilon=apriori_eps(n, q, beta), beta=beta, n=n,
    )


def _rows(data: Union[ScenarioSet, np.ndarray], q: int) -> np.ndarray:
    matrix = data.b_values if isinstance(data, ScenarioSet) else np.asarray(data, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    if matrix.ndim != 2 or matrix.shape[1] != q:
        raise DimensionMismatchError(
            f"decision has {q} constraints, scenario rows have shape {matrix.shape}"
        )
    return matrix


def violation_mask(d: Decision, data: Union[ScenarioSet, np.ndarray]) -> np.ndarray:
    """Boolean per row: does d violate at least one constraint of that scenario"""
    rows = _rows(data, d.q)
    return np.any(d.g_values > rows, axis=1)


def violates(d: Decision, b_row: Sequence[float]) -> bool:
    """True iff g_l > b_l for some l; equality is feasible"""
    row = np.asarray(b_row, dtype=float)
    if row.shape != (d.q,):
        raise DimensionMismatchError(f"expected a row of length {d.q}, got shape {row.shape}")
    return bool(np.any(d.g_values > row))


def empirical_risk(d: Decision, validation: Union[ScenarioSet, np.ndarray]) -> float:
    """Fraction of validation scenarios violated by d"""
    rows = _rows(validation, d.q)
    if rows.shape[0] == 0:
        raise EmptyScenarioSetError("empirical risk needs at least one validation row")
    return float(violation_mask(d, rows).mean())


def _require_feasible(d: Decision, summary: DominanceSummary):
    if d.q != summary.xi_star.shape[0]:
        raise DimensionMismatchError(
            f"decision has {d.q} constraints, summary has {summary.xi_star.shape[0]}"
        )
    worst = float(np.max(d.g_values - summary.xi_star))
    if worst > 0.0:
        raise ContractError(
            f"decision is infeasible for the training scenarios (max excess {worst:.3g})"
        )


def dominance_check(d: Decision, summary: DominanceSummary, probe: Union[ScenarioSet, np.ndarray]) -> bool:
    """
    Per-sample inclusion of violation sets

    For a decision feasible on the training set (g <= xi*), every probe row
    violated by d must also be violated by xi*.
    """
    _require_feasible(d, summary)
    rows = _rows(probe, d.q)
    by_decision = violation_mask(d, rows)
    by_reduction = violation_mask(summary.as_decision(), rows)
    exceptions = int(np.count_nonzero(by_decision & ~by_reduction))
    if exceptions:
        logger.error("%d probe rows violated by the decision but not by xi*", exceptions)
    return exceptions == 0


def dominance_gap_rows(d: Decision, summary: DominanceSummary,
                       probe: Union[ScenarioSet, np.ndarray]) -> np.ndarray:
    """Probe rows violated by xi* but not by d, the witnesses of V(d) < V'(xi*)"""
    _require_feasible(d, summary)
    rows = _rows(probe, d.q)
    return np.flatnonzero(violation_mask(summary.as_decision(), rows) & ~violation_mask(d, rows))


def risk_under_independence(d: Decision, survival) -> float:
    """
    Exact risk of d when the columns of b are independent

    survival(g) returns P(b_l >= g_l) per column; the risk is
    1 - prod_l survival_l(g_l).
    """
    probs = np.asarray(survival(d.g_values), dtype=float)
    if probs.shape != (d.q,):
        raise DimensionMismatchError(f"survival returned shape {probs.shape}, expected ({d.q},)")
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise ParameterError("survival probabilities must lie in [0, 1]")
    return float(1.0 - np.prod(probs))
