"""
Data-set sizing: one-shot, eps-based comparison size and the incremental schedule
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import logsumexp

from certificates.certmath import binom_tail_log, eps_n_beta, log_binomial_table, log_within

logger = logging.getLogger(__name__)

# rows evaluated per vectorised step when scanning for N_j
_SCAN_CHUNK = 4096


class SizingSpec(BaseModel):
    """Target: risk at most eps_bar with confidence 1 - beta, q uncertain constraints"""
    model_config = ConfigDict(frozen=True)

    q: int = Field(..., ge=1)
    eps_bar: float = Field(..., gt=0.0, lt=1.0)
    beta: float = Field(..., gt=0.0, lt=1.0)


@dataclass(frozen=True)
class IncrementalSchedule:
    """Thresholds of the staged collection, row j = 0..q"""
    m_bar: np.ndarray
    beta_j: np.ndarray
    n_j: np.ndarray

    def __post_init__(self):
        for name in ("m_bar", "beta_j", "n_j"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def q(self) -> int:
        return len(self.n_j) - 1

    def rows(self):
        """(j, M_bar_j, beta_j, N_j) tuples"""
        return [
            (j, int(self.m_bar[j]), float(self.beta_j[j]), int(self.n_j[j]))
            for j in range(len(self.n_j))
        ]


def smallest_satisfying(lower: int, ok: Callable[[int], bool]) -> int:
    """
    Smallest integer M >= lower with ok(M), for a predicate monotone in M

    Exponential bracketing from lower, then binary search inside the bracket.
    """
    if ok(lower):
        return lower
    lo, step = lower, 1
    hi = lower + step
    while not ok(hi):
        lo = hi
        step *= 2
        hi = lower + step
    # invariant: ok(hi) and not ok(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def one_shot_size(spec: SizingSpec) -> int:
    """
    Smallest M >= q whose binomial tail with q terms at eps_bar is at most beta

    >>> one_shot_size(SizingSpec(q=1, eps_bar=0.1, beta=1e-6))
    132
    """
    log_beta = math.log(spec.beta)
    return smallest_satisfying(
        spec.q, lambda m: log_within(binom_tail_log(m, spec.q, spec.eps_bar), log_beta)
    )


def eps_based_size(spec: SizingSpec) -> int:
    """Smallest M >= q with eps_{M,beta}(q) <= eps_bar"""
    return smallest_satisfying(
        spec.q, lambda m: eps_n_beta(m, spec.beta, spec.q) <= spec.eps_bar
    )


def _first_threshold(j: int, m_bar: int, log_beta_j: float, log_q: float) -> int:
    """First N > m_bar with ln beta_j + L_j >= ln C(N,j) + (N-j) ln(1-eps_bar)"""
    table = log_binomial_table(m_bar)
    m = np.arange(j, m_bar + 1)
    lhs = log_beta_j + float(logsumexp(table.value(m, np.full_like(m, j)) + (m - j) * log_q))

    start = m_bar + 1
    while True:
        n = np.arange(start, start + _SCAN_CHUNK)
        table = log_binomial_table(int(n[-1]))
        rhs = table.value(n, np.full_like(n, j)) + (n - j) * log_q
        hits = np.flatnonzero(lhs >= rhs)
        if hits.size:
            return int(n[hits[0]])
        start += _SCAN_CHUNK


def incremental_schedule(spec: SizingSpec) -> IncrementalSchedule:
    """
    Thresholds N_j, M_bar_j and split confidence beta_j for j = 0..q

    M_bar_j is the one-shot size for j constraints (M_bar_0 = M_bar_1),
    beta_j = beta / ((q+1)(M_bar_j+1)) and N_j the first N > M_bar_j with
    beta_j * sum_{m=j}^{M_bar_j} C(m,j)(1-eps_bar)^(m-j) >= C(N,j)(1-eps_bar)^(N-j).
    """
    q = spec.q
    log_q = math.log1p(-spec.eps_bar)
    m_bar = np.empty(q + 1, dtype=np.int64)
    for j in range(1, q + 1):
        m_bar[j] = one_shot_size(SizingSpec(q=j, eps_bar=spec.eps_bar, beta=spec.beta))
    m_bar[0] = m_bar[1]

    beta_j = spec.beta / ((q + 1) * (m_bar.astype(float) + 1.0))
    n_j = np.empty(q + 1, dtype=np.int64)
    for j in range(q + 1):
        n_j[j] = _first_threshold(j, int(m_bar[j]), math.log(beta_j[j]), log_q)
        logger.debug("j=%d: M_bar=%d beta_j=%.4g N_j=%d", j, m_bar[j], beta_j[j], n_j[j])

    if np.any(np.diff(n_j) < 0):
        logger.warning("incremental thresholds are not non-decreasing: %s", n_j.tolist())
    return IncrementalSchedule(m_bar=m_bar, beta_j=beta_j, n_j=n_j)
