"""
Shared helpers for the scert test suites
"""
import os
from typing import List, Sequence

import mpmath
import numpy as np

from ucp.units import GenUnit, UcInstance

GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")


def print_test_header(test_name: str):
    """Print formatted test header"""
    print("\n" + "=" * 80)
    print(f"TEST: {test_name}")
    print("=" * 80)


def print_test_result(passed: bool, message: str = ""):
    """Print test result"""
    status = "PASSED" if passed else "FAILED"
    print(f"\n{status}")
    if message:
        print(f"   {message}")
    print()


def mp_eps(n: int, beta: float, k: int, steps: int = 120) -> float:
    """
    Extended-precision violation function: 200-bit bisection on the exact
    polynomial (beta/N) sum_{m=k}^{N-1} C(m,k) t^(m-k) - C(N,k) t^(N-k)
    """
    if k == n:
        return 1.0
    with mpmath.workprec(200):
        b = mpmath.mpf(beta)
        coefs = [mpmath.binomial(m, k) for m in range(k, n)]
        c_nk = mpmath.binomial(n, k)

        def balance(t):
            lhs = b / n * mpmath.fsum(c * t ** i for i, c in enumerate(coefs))
            return lhs - c_nk * t ** (n - k)

        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        for _ in range(steps):
            mid = (lo + hi) / 2
            if balance(mid) > 0:
                lo = mid
            else:
                hi = mid
        return float(1 - lo)


def mp_binom_tail(n: int, j: int, eps: float) -> float:
    """Natural log of the binomial tail with j terms, at 200 bits"""
    with mpmath.workprec(200):
        e = mpmath.mpf(eps)
        total = mpmath.fsum(mpmath.binomial(n, m) * e ** m * (1 - e) ** (n - m) for m in range(j))
        return float(mpmath.log(total))


def tiny_unit(**overrides) -> GenUnit:
    params = dict(name="gu1", a=1.0, b=0.4, c=0.3, c_u=0.9, c_d=0.4, ramp_down=7.0, ramp_up=7.0,
                  t_up=1, t_down=1, zones=((1.0, 5.0),))
    params.update(overrides)
    return GenUnit(**params)


def tiny_instance(**overrides) -> UcInstance:
    """One unit, one zone, T = 2: two continuous and six binary variables"""
    return UcInstance(units=(tiny_unit(**overrides),), horizon=2)


def write_csv(path, rows: Sequence[Sequence[float]], header: List[str] = None):
    with open(path, "w", encoding="utf-8") as f:
        if header is not None:
            f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(float(v)) for v in row) + "\n")


def random_b(rng: np.random.Generator, n: int, q: int) -> np.ndarray:
    """Continuous draws: column minima are unique almost surely"""
    return rng.uniform(0.0, 1.0, size=(n, q))
