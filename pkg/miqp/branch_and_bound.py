"""
Best-first branch-and-bound over the binary variables of a MiqpModel
"""
import heapq
import itertools
import logging
from typing import List, Optional, Tuple

import numpy as np

from miqp.model import MiqpModel, SolveOutcome, SolveStatus
from miqp.qp_solver import ModelRelaxation, QpResult
from utils.errors import QpSolverError

logger = logging.getLogger(__name__)

# internal solving is meant for desk-scale models; larger ones go through export_lp
DESK_BINARY_CAP = 60

INTEGRALITY_TOL = 1e-6


def _branching_index(x: np.ndarray, model: MiqpModel) -> Optional[int]:
    """Most fractional binary, lowest index on ties; None when all are integral"""
    xb = x[model.binary_slice]
    frac = np.minimum(xb - np.floor(xb), np.ceil(xb) - xb)
    if xb.size == 0 or frac.max() <= INTEGRALITY_TOL:
        return None
    # argmin of |x - 0.5| returns the first (lowest) index among ties
    return model.n_cont + int(np.argmin(np.abs(xb - 0.5)))


def _round_and_polish(relax: ModelRelaxation, x: np.ndarray,
                      lower: np.ndarray, upper: np.ndarray) -> QpResult:
    """Fix binaries at their rounded values and re-solve the continuous part"""
    model = relax.model
    b = model.binary_slice
    fixed = np.round(x[b])
    lo, hi = lower.copy(), upper.copy()
    lo[b] = fixed
    hi[b] = fixed
    return relax.solve(lo, hi, x_start=x)


def solve_bb(m: MiqpModel, gap_tol: float = 1e-6, node_limit: int = 20000) -> SolveOutcome:
    """
    Solve a MiqpModel to the requested relative gap

    Node relaxations relax binaries to [0, 1] and are warm-started from the
    parent solution. Branching picks the most fractional binary. An integral
    relaxation solution becomes an incumbent candidate after its binaries are
    rounded and its continuous part re-solved. A QP failure at any node stops
    the search with status SolverError; the incumbent found so far, if any,
    is returned with it.
    """
    relax = ModelRelaxation(m)
    try:
        root = relax.solve(m.lower.copy(), m.upper.copy())
    except QpSolverError as exc:
        logger.error("B&B root relaxation failed: %s", exc)
        return SolveOutcome(status=SolveStatus.SOLVER_ERROR, assignment=None, objective=np.inf,
                            nodes_explored=1, best_bound=-np.inf, qp_solves=relax.solves,
                            notes=(f"root: {exc}",))
    if not root.feasible:
        return SolveOutcome(status=SolveStatus.INFEASIBLE, assignment=None, objective=np.inf,
                            nodes_explored=1, best_bound=np.inf, qp_solves=relax.solves)

    counter = itertools.count()
    heap: List[Tuple[float, int, np.ndarray, np.ndarray, np.ndarray]] = []
    heapq.heappush(heap, (root.objective, next(counter), m.lower.copy(), m.upper.copy(), root.x))
    nodes = 1
    incumbent_x: Optional[np.ndarray] = None
    incumbent = np.inf
    notes: Tuple[str, ...] = ()

    def gap_closed(bound: float) -> bool:
        return incumbent - bound <= gap_tol * max(1.0, abs(incumbent))

    status = SolveStatus.OPTIMAL
    while heap:
        bound, _, lower, upper, x = heap[0]
        if incumbent_x is not None and gap_closed(bound):
            break
        heapq.heappop(heap)

        try:
            branch = _branching_index(x, m)
            if branch is None:
                polished = _round_and_polish(relax, x, lower, upper)
                if polished.feasible and polished.objective < incumbent:
                    incumbent, incumbent_x = polished.objective, polished.x
                    logger.debug("node %d: incumbent %.10g (bound %.10g)", nodes, incumbent, bound)
                continue

            if nodes >= node_limit:
                heapq.heappush(heap, (bound, next(counter), lower, upper, x))
                status = SolveStatus.NODE_LIMIT
                break

            for value in (0.0, 1.0):
                lo, hi = lower.copy(), upper.copy()
                lo[branch] = value
                hi[branch] = value
                nodes += 1
                child = relax.solve(lo, hi, x_start=x)
                if child.feasible and child.objective < incumbent:
                    heapq.heappush(heap, (child.objective, next(counter), lo, hi, child.x))
        except QpSolverError as exc:
            logger.error("B&B node %d: relaxation failed: %s", nodes, exc)
            # unexplored subtree keeps its parent bound
            heapq.heappush(heap, (bound, next(counter), lower, upper, x))
            status = SolveStatus.SOLVER_ERROR
            notes = (f"node {nodes}: {exc}",)
            break

    best_bound = min([incumbent] + [entry[0] for entry in heap])
    if incumbent_x is None:
        if status is not SolveStatus.OPTIMAL:
            return SolveOutcome(status=status, assignment=None, objective=np.inf,
                                nodes_explored=nodes, best_bound=best_bound, qp_solves=relax.solves,
                                notes=notes)
        return SolveOutcome(status=SolveStatus.INFEASIBLE, assignment=None, objective=np.inf,
                            nodes_explored=nodes, best_bound=np.inf, qp_solves=relax.solves)

    assignment = incumbent_x.copy()
    assignment[m.binary_slice] = np.round(assignment[m.binary_slice])
    logger.info("B&B %s: objective %.10g, bound %.10g, %d nodes",
                status.value, incumbent, best_bound, nodes)
    return SolveOutcome(status=status, assignment=assignment, objective=incumbent,
                        nodes_explored=nodes, best_bound=best_bound, qp_solves=relax.solves,
                        notes=notes)
