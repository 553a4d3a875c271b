"""
Exhaustive enumeration of binary assignments; ground truth for tiny models
"""
import itertools
import logging

import numpy as np

from miqp.model import MiqpModel, SolveOutcome, SolveStatus
from miqp.qp_solver import FEAS_TOL, ModelRelaxation
from utils.errors import EnumerationCapError

logger = logging.getLogger(__name__)

ENUMERATION_CAP = 24

# relative objective difference below which two fixings count as tied
TIE_RTOL = 1e-9


def solve_enum(m: MiqpModel) -> SolveOutcome:
    """
    Try every binary assignment in lexicographic order and keep the best

    Rows involving only binaries are checked before any QP is solved. A later
    assignment replaces the incumbent only on strict improvement, so exact
    ties keep the lexicographically smallest assignment and set `tie`.
    """
    if m.n_bin > ENUMERATION_CAP:
        raise EnumerationCapError(m.n_bin, ENUMERATION_CAP)

    relax = ModelRelaxation(m)
    b = m.binary_slice
    cont_part = relax.A_ub[:, :m.n_cont]
    binary_only = ~np.any(cont_part != 0.0, axis=1)
    A_bin, b_bin = relax.A_ub[binary_only][:, b], relax.b_ub[binary_only]

    best_x = None
    best = np.inf
    tie = False
    fixings = 0
    for bits in itertools.product((0.0, 1.0), repeat=m.n_bin):
        fixing = np.array(bits)
        if np.any(fixing < m.lower[b]) or np.any(fixing > m.upper[b]):
            continue
        if A_bin.shape[0] and np.any(A_bin @ fixing > b_bin + FEAS_TOL * np.maximum(1.0, np.abs(b_bin))):
            continue
        lo, hi = m.lower.copy(), m.upper.copy()
        lo[b] = fixing
        hi[b] = fixing
        result = relax.solve(lo, hi)
        fixings += 1
        if not result.feasible:
            continue
        scale = TIE_RTOL * max(1.0, abs(best)) if np.isfinite(best) else 0.0
        if result.objective < best - scale:
            best, best_x, tie = result.objective, result.x, False
        elif abs(result.objective - best) <= scale:
            tie = True

    logger.debug("enumeration: %d fixings solved, best %.10g, tie=%s", fixings, best, tie)
    if best_x is None:
        return SolveOutcome(status=SolveStatus.INFEASIBLE, assignment=None, objective=np.inf,
                            nodes_explored=fixings, best_bound=np.inf, qp_solves=relax.solves)
    notes = ("objective tie: lexicographically smallest assignment reported",) if tie else ()
    return SolveOutcome(status=SolveStatus.OPTIMAL, assignment=best_x, objective=best,
                        nodes_explored=fixings, best_bound=best, qp_solves=relax.solves,
                        tie=tie, notes=notes)
