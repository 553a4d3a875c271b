"""
Violation function and binomial-tail quantities behind every certificate

All sums run in the log domain: with N in the thousands and beta around
1e-6 the plain-float versions overflow long before the answer is reached.
"""
import logging
import math
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import gammaln, logsumexp

from utils.config import validated
from utils.errors import ParameterError

logger = logging.getLogger(__name__)

# 2**-34 < 1e-10: width of the final bisection bracket on t and on epsilon
BISECTION_STEPS = 34

# relative slack accepted when comparing a log tail against ln(beta)
LOG_TIE_RTOL = 1e-12


class EpsParams(BaseModel):
    """Arguments of the violation function eps_{N,beta}(k)"""
    model_config = ConfigDict(frozen=True)

    n_scenarios: int = Field(..., ge=1, description="N, number of scenarios")
    beta: float = Field(..., gt=0.0, lt=1.0, description="confidence parameter")
    k: int = Field(..., ge=0, description="complexity argument")

    @model_validator(mode="after")
    def _k_in_range(self):
        if self.k > self.n_scenarios:
            raise ValueError(f"k={self.k} exceeds n_scenarios={self.n_scenarios}")
        return self


class LogBinomialTable:
    """
    Immutable table of ln C(n, k) for 0 <= k <= n <= max_n

    Stores log-factorials and combines them on lookup, so memory grows
    linearly in max_n. value(n, 0) and value(n, n) are exactly 0.
    """

    def __init__(self, max_n: int):
        if max_n < 1:
            raise ParameterError(f"max_n must be positive, got {max_n}")
        self.max_n = int(max_n)
        log_fact = gammaln(np.arange(self.max_n + 1, dtype=float) + 1.0)
        log_fact[0] = 0.0
        log_fact[1] = 0.0
        log_fact.setflags(write=False)
        self._log_fact = log_fact

    def value(self, n, k):
        """ln C(n, k); n and k may be integer arrays of equal shape"""
        n_arr = np.asarray(n)
        k_arr = np.asarray(k)
        if np.any(n_arr > self.max_n) or np.any(k_arr < 0) or np.any(k_arr > n_arr):
            raise ParameterError(
                f"binomial index outside table (max_n={self.max_n})"
            )
        lf = self._log_fact
        out = lf[n_arr] - lf[k_arr] - lf[n_arr - k_arr]
        return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=8)
def _table_for(size: int) -> LogBinomialTable:
    return LogBinomialTable(size)


def log_binomial_table(max_n: int) -> LogBinomialTable:
    """Shared table covering at least max_n, sized to the next power of two"""
    size = 1 << max(10, int(max_n).bit_length())
    return _table_for(size)


def log_within(log_value: float, log_target: float) -> bool:
    """log_value <= log_target, accepting a 1e-12 relative rounding tie"""
    return log_value <= log_target + LOG_TIE_RTOL * abs(log_target)


def _balance(log_beta_over_n: float, log_coefs: np.ndarray, powers: np.ndarray,
             log_c_nk: float, n_minus_k: int, t: float) -> float:
    if t <= 0.0:
        return math.inf
    log_t = math.log(t)
    lhs = log_beta_over_n + logsumexp(log_coefs + powers * log_t)
    rhs = log_c_nk + n_minus_k * log_t
    return lhs - rhs


def violation_balance(n_scenarios: int, beta: float, k: int, t: float) -> float:
    """
    Log-domain balance of the defining equation of t(k)

    Returns ln[(beta/N) * sum_{m=k}^{N-1} C(m,k) t^(m-k)] - ln[C(N,k) t^(N-k)].
    Positive below the root, negative above it.
    """
    p = validated(EpsParams, n_scenarios=n_scenarios, beta=beta, k=k)
    if p.k == p.n_scenarios:
        raise ParameterError("the balance is undefined for k = N")
    table = log_binomial_table(p.n_scenarios)
    m = np.arange(p.k, p.n_scenarios)
    return _balance(
        math.log(p.beta / p.n_scenarios), table.value(m, np.full_like(m, p.k)),
        (m - p.k).astype(float), table.value(p.n_scenarios, p.k),
        p.n_scenarios - p.k, t,
    )


def eps_n_beta(n_scenarios: int, beta: float, k: int) -> float:
    """
    Violation function eps_{N,beta}(k)

    Returns 1 for k = N, otherwise 1 - t(k) with t(k) the unique root in
    (0, 1) of (beta/N) sum_{m=k}^{N-1} C(m,k) t^(m-k) = C(N,k) t^(N-k).
    The root is bracketed by a fixed number of halvings of [0, 1] and the
    lower end is used, so the returned value never understates the risk.

    >>> round(eps_n_beta(1, 0.01, 0), 8)
    0.99
    """
    p = validated(EpsParams, n_scenarios=n_scenarios, beta=beta, k=k)
    n, k = p.n_scenarios, p.k
    if k == n:
        return 1.0

    table = log_binomial_table(n)
    m = np.arange(k, n)
    log_coefs = table.value(m, np.full_like(m, k))
    powers = (m - k).astype(float)
    log_beta_over_n = math.log(p.beta / n)
    log_c_nk = table.value(n, k)

    # sum_{m=k}^{N-1} C(m,k) = C(N,k+1): closed form of the balance at t = 1
    at_one = log_beta_over_n + table.value(n, k + 1) - log_c_nk
    if at_one >= 0.0:
        raise ParameterError(
            f"no root in (0,1) for N={n}, beta={p.beta}, k={k}"
        )

    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if _balance(log_beta_over_n, log_coefs, powers, log_c_nk, n - k, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    logger.debug("eps_n_beta(N=%d, beta=%g, k=%d): t in [%.12g, %.12g]", n, p.beta, k, lo, hi)
    return min(1.0, max(0.0, 1.0 - lo))


def binom_tail_log(n: int, j: int, eps: float) -> float:
    """
    ln of sum_{m=0}^{j-1} C(n,m) eps^m (1-eps)^(n-m)

    >>> round(binom_tail_log(132, 1, 0.1), 4)
    -13.9076
    """
    if not 0.0 < eps < 1.0:
        raise ParameterError(f"eps must lie in (0,1), got {eps}")
    if not 1 <= j <= n:
        raise ParameterError(f"need 1 <= j <= n, got j={j}, n={n}")
    log_q = math.log1p(-eps)
    if j == 1:
        return n * log_q
    table = log_binomial_table(n)
    m = np.arange(j)
    terms = table.value(np.full_like(m, n), m) + m * math.log(eps) + (n - m) * log_q
    return float(logsumexp(terms))


def apriori_eps(n: int, q: int, beta: float) -> float:
    """
    Smallest epsilon whose binomial tail with q terms falls below beta

    Bisection on (0, 1); the upper bracket end is returned so that the
    tail inequality holds at the returned value.
    """
    if not 0.0 < beta < 1.0:
        raise ParameterError(f"beta must lie in (0,1), got {beta}")
    if q < 1 or n < q:
        raise ParameterError(f"need n >= q >= 1, got n={n}, q={q}")
    log_beta = math.log(beta)
    lo, hi = 0.0, 1.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if log_within(binom_tail_log(n, q, mid), log_beta):
            hi = mid
        else:
            lo = mid
    return hi
