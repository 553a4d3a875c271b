"""
Unit-commitment solvers plugged into the incremental driver and the support search
"""
import logging
import os
from typing import List, Optional

import numpy as np

from certificates.scenario_core import Decision
from certificates.support import SolutionRecord
from miqp.branch_and_bound import DESK_BINARY_CAP, solve_bb
from miqp.lp_writer import write_lp
from miqp.model import FEASIBILITY_TOL, SolveStatus
from sizing.incremental import ReducedSolution
from ucp.model_builder import UcSolution, build_miqp, decode_solution
from ucp.units import UcInstance
from utils.errors import ContractError, ModelError, QpSolverError, SolverCapError
from utils.metrics import SolveMetrics

logger = logging.getLogger(__name__)


def check_solver_cap(inst: UcInstance, cap: int = DESK_BINARY_CAP):
    """Refuse instances the internal branch-and-bound is not meant for"""
    if inst.n_binaries() > cap:
        raise SolverCapError(inst.n_binaries(), cap)


def _solve_uc(inst: UcInstance, xi: np.ndarray, gap_tol: float, node_limit: int,
              metrics: Optional[SolveMetrics], name: str) -> UcSolution:
    model = build_miqp(inst, xi, name=name)
    if model.n_bin > DESK_BINARY_CAP:
        raise SolverCapError(model.n_bin, DESK_BINARY_CAP)
    outcome = solve_bb(model, gap_tol=gap_tol, node_limit=node_limit)
    if metrics is not None:
        metrics.add_solve("bb", nodes=outcome.nodes_explored, qp_solves=outcome.qp_solves,
                          status=outcome.status.value)
    if outcome.status is SolveStatus.SOLVER_ERROR and not outcome.has_solution:
        raise QpSolverError(f"branch-and-bound stopped: {'; '.join(outcome.notes)}")
    if not outcome.has_solution:
        raise ModelError(
            f"unit commitment is {outcome.status.value} for the requested demand "
            f"(peak {float(np.max(-np.asarray(xi))):.4g} GW, capacity {inst.total_capacity:.4g} GW)"
        )
    if outcome.status is not SolveStatus.OPTIMAL:
        logger.warning("%s: keeping incumbent, objective %.6g, bound %.6g",
                       outcome.status.value, outcome.objective, outcome.best_bound)
    return decode_solution(inst, outcome.assignment, outcome.objective)


class UcReducedSolver:
    """
    Reduced solver of the incremental driver: min-cost schedule covering -xi

    The schedule's constraint image is snapped onto xi where it exceeds it by
    no more than the model feasibility tolerance.
    """

    def __init__(self, inst: UcInstance, gap_tol: float = 1e-6, node_limit: int = 20000,
                 metrics: Optional[SolveMetrics] = None):
        check_solver_cap(inst)
        self.inst = inst
        self.gap_tol = gap_tol
        self.node_limit = node_limit
        self.metrics = metrics

    def __call__(self, xi: np.ndarray) -> ReducedSolution:
        xi = np.asarray(xi, dtype=float)
        sol = _solve_uc(self.inst, xi, self.gap_tol, self.node_limit, self.metrics, "uc_reduced")
        g = sol.decision().g_values
        excess = float(np.max(g - xi))
        if excess > FEASIBILITY_TOL:
            raise ContractError(f"schedule misses the demand by {excess:.3g} GW")
        return ReducedSolution(decision=Decision(np.minimum(g, xi)), objective=sol.objective,
                               payload=sol)


class LpExportSolver:
    """Writes the reduced model to an LP file instead of solving it"""

    def __init__(self, inst: UcInstance, path: str, metrics: Optional[SolveMetrics] = None):
        self.inst = inst
        self.path = path
        self.metrics = metrics

    def __call__(self, xi: np.ndarray) -> ReducedSolution:
        xi = np.asarray(xi, dtype=float)
        model = build_miqp(self.inst, xi, name=os.path.splitext(os.path.basename(self.path))[0])
        write_lp(model, self.path)
        if self.metrics is not None:
            self.metrics.add_solve("export", status="Exported")
        logger.info("reduced model written to %s", self.path)
        # decision xi itself is the loosest image satisfying g <= xi
        return ReducedSolution(decision=Decision(xi), objective=float("nan"), payload=self.path)


class UcSupportOracle:
    """
    Deterministic UC solve on a list of demand scenarios (rows of b = -demand)

    An empty list leaves every hour unconstrained.
    """

    def __init__(self, inst: UcInstance, b_values: np.ndarray, gap_tol: float = 1e-6,
                 node_limit: int = 20000, metrics: Optional[SolveMetrics] = None):
        check_solver_cap(inst)
        b_values = np.asarray(b_values, dtype=float)
        if b_values.ndim != 2 or b_values.shape[1] != inst.horizon:
            raise ModelError(f"scenario matrix of shape {b_values.shape} does not match T={inst.horizon}")
        self.inst = inst
        self.b_values = b_values
        self.gap_tol = gap_tol
        self.node_limit = node_limit
        self.metrics = metrics

    def __call__(self, indices: List[int]) -> SolutionRecord:
        if indices:
            xi = self.b_values[np.asarray(indices, dtype=int)].min(axis=0)
        else:
            xi = np.full(self.inst.horizon, np.inf)
        sol = _solve_uc(self.inst, xi, self.gap_tol, self.node_limit, self.metrics, "uc_support")
        binaries = np.concatenate([z.ravel() for z in sol.zone_on]
                                  + [sol.startup.ravel(), sol.shutdown.ravel()])
        return SolutionRecord(continuous=sol.power.ravel(), binaries=binaries,
                              objective=sol.objective)

    def decision_of(self, record: SolutionRecord) -> Decision:
        power = np.asarray(record.continuous).reshape(self.inst.n_p, self.inst.horizon)
        return Decision(-power.sum(axis=0))
