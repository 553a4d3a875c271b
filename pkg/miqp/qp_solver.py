"""
Dense convex QP with a diagonal Hessian: primal active set over a null-space basis

min  sum_i q_i x_i^2 + c_i x_i   s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub

Fixed variables (lb == ub) are eliminated first. The start point comes from
a warm start when one is feasible, otherwise from a HiGHS LP on the linear
cost, which also detects infeasibility.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh, null_space
from scipy.optimize import linprog

from utils.errors import QpSolverError

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-9
KKT_TOL = 1e-8
_INDEP_TOL = 1e-9
_EIG_TOL = 1e-11
_STEP_TOL = 1e-12
_MULT_TOL = 1e-10


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def worst(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity)


@dataclass(frozen=True)
class QpResult:
    feasible: bool
    x: Optional[np.ndarray]
    objective: float
    iterations: int = 0
    kkt: Optional[KktResiduals] = None

    def kkt_ok(self, scale: float = 1.0) -> bool:
        return self.kkt is not None and self.kkt.worst() <= KKT_TOL * max(1.0, scale)


_INFEASIBLE = QpResult(feasible=False, x=None, objective=np.inf)


class _Basis:
    """Orthonormal basis grown one row at a time, rejecting dependent rows"""

    def __init__(self, n: int):
        self.vectors = np.empty((0, n))

    def try_add(self, row: np.ndarray) -> bool:
        norm = np.linalg.norm(row)
        if norm == 0.0:
            return False
        resid = row - self.vectors.T @ (self.vectors @ row)
        r = np.linalg.norm(resid)
        if r <= _INDEP_TOL * norm:
            return False
        self.vectors = np.vstack([self.vectors, resid / r])
        return True


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def _phase_one(c, A_ub, b_ub, A_eq, b_eq, lb, ub) -> Optional[np.ndarray]:
    bounds = [(None if np.isinf(lo) else lo, None if np.isinf(hi) else hi) for lo, hi in zip(lb, ub)]
    options = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
    kwargs = dict(
        A_ub=A_ub if A_ub.shape[0] else None, b_ub=b_ub if A_ub.shape[0] else None,
        A_eq=A_eq if A_eq.shape[0] else None, b_eq=b_eq if A_eq.shape[0] else None,
        bounds=bounds, method="highs", options=options,
    )
    res = linprog(c, **kwargs)
    if res.status == 3:
        res = linprog(np.zeros_like(c), **kwargs)
    if res.status == 2:
        return None
    if res.status != 0:
        raise QpSolverError(f"phase-1 LP failed: {res.message}")
    return np.clip(res.x, lb, ub)


def _feasible(x, G, h, A_eq, b_eq) -> bool:
    if G.shape[0] and np.any(G @ x - h > FEAS_TOL * np.maximum(1.0, np.abs(h))):
        return False
    if A_eq.shape[0] and np.any(np.abs(A_eq @ x - b_eq) > FEAS_TOL * np.maximum(1.0, np.abs(b_eq))):
        return False
    return True


def _active_set(hdiag, c, G, h, A_eq, x, max_iter) -> Tuple[np.ndarray, np.ndarray, List[int], List[int], int]:
    """Returns (x, multipliers for kept equalities then working rows, kept equalities, working rows, iterations)"""
    n = len(c)
    basis = _Basis(n)
    eq_rows = [i for i in range(A_eq.shape[0]) if basis.try_add(A_eq[i])]
    slack = h - G @ x
    work = [i for i in np.flatnonzero(slack <= FEAS_TOL * np.maximum(1.0, np.abs(h))).tolist()
            if basis.try_add(G[i])]
    A_eq_w = A_eq[eq_rows]

    for it in range(1, max_iter + 1):
        A_w = np.vstack([A_eq_w, G[work]]) if work else A_eq_w
        grad = hdiag * x + c
        Z = null_space(A_w) if A_w.shape[0] else np.eye(n)
        ray = False
        if Z.shape[1] == 0:
            p = np.zeros(n)
        else:
            evals, V = eigh(Z.T @ (hdiag[:, None] * Z))
            coord = V.T @ (Z.T @ grad)
            flat = evals <= _EIG_TOL * max(1.0, float(evals.max()))
            if np.any(np.abs(coord[flat]) > _MULT_TOL * max(1.0, _inf_norm(grad))):
                ray = True
                w = -(V[:, flat] @ coord[flat])
            else:
                w = -(V[:, ~flat] @ (coord[~flat] / evals[~flat]))
            p = Z @ w

        if _inf_norm(p) <= _STEP_TOL * max(1.0, _inf_norm(x)):
            lam = np.linalg.lstsq(A_w.T, -grad, rcond=None)[0] if A_w.shape[0] else np.empty(0)
            mu = lam[len(eq_rows):]
            if mu.size == 0 or mu.min() >= -_MULT_TOL * max(1.0, _inf_norm(grad)):
                return x, lam, eq_rows, work, it
            work.pop(int(np.argmin(mu)))
            continue

        Gp = G @ p
        in_work = np.zeros(G.shape[0], dtype=bool)
        in_work[work] = True
        cand = np.flatnonzero(~in_work & (Gp > _STEP_TOL * max(1.0, _inf_norm(p))))
        alpha = np.inf if ray else 1.0
        block = None
        if cand.size:
            ratios = np.maximum(h[cand] - G[cand] @ x, 0.0) / Gp[cand]
            k = int(np.argmin(ratios))
            if ratios[k] < alpha:
                alpha, block = float(ratios[k]), int(cand[k])
        if not np.isfinite(alpha):
            raise QpSolverError("QP is unbounded below along a zero-curvature direction")
        x = x + alpha * p
        if block is not None:
            work.append(block)
    raise QpSolverError(f"active-set iteration limit ({max_iter}) reached")


def solve_qp(quad_diag, lin_cost, A_ub, b_ub, A_eq, b_eq, lb, ub,
             constant: float = 0.0, x_start: Optional[np.ndarray] = None) -> QpResult:
    """
    Solve the QP; infeasibility is reported through QpResult.feasible

    Args:
        quad_diag: q_i >= 0, objective term q_i x_i^2
        lin_cost: c_i
        A_ub, b_ub, A_eq, b_eq: dense linear rows (may have zero rows)
        lb, ub: variable bounds, +-inf allowed
        constant: objective offset
        x_start: warm start, clipped to the bounds and used if feasible
    """
    q = np.asarray(quad_diag, dtype=float)
    c = np.asarray(lin_cost, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub + FEAS_TOL):
        return _INFEASIBLE

    fixed = lb >= ub
    free = ~fixed
    x = np.where(fixed, lb, 0.0)
    b_ub_r = b_ub - A_ub[:, fixed] @ x[fixed]
    b_eq_r = b_eq - A_eq[:, fixed] @ x[fixed]
    A_ub_r = A_ub[:, free]
    A_eq_r = A_eq[:, free]

    empty_ub = ~np.any(A_ub_r != 0.0, axis=1)
    empty_eq = ~np.any(A_eq_r != 0.0, axis=1)
    if np.any(b_ub_r[empty_ub] < -FEAS_TOL * np.maximum(1.0, np.abs(b_ub[empty_ub]))):
        return _INFEASIBLE
    if np.any(np.abs(b_eq_r[empty_eq]) > FEAS_TOL * np.maximum(1.0, np.abs(b_eq[empty_eq]))):
        return _INFEASIBLE
    A_ub_r, b_ub_r = A_ub_r[~empty_ub], b_ub_r[~empty_ub]
    A_eq_r, b_eq_r = A_eq_r[~empty_eq], b_eq_r[~empty_eq]

    if not free.any():
        obj = float(q @ (x * x) + c @ x + constant)
        return QpResult(feasible=True, x=x, objective=obj, kkt=KktResiduals(0.0, 0.0, 0.0))

    qf, cf, lbf, ubf = q[free], c[free], lb[free], ub[free]
    nf = len(cf)
    eye = np.eye(nf)
    lo_rows = np.flatnonzero(np.isfinite(lbf))
    hi_rows = np.flatnonzero(np.isfinite(ubf))
    G = np.vstack([A_ub_r, -eye[lo_rows], eye[hi_rows]])
    h = np.concatenate([b_ub_r, -lbf[lo_rows], ubf[hi_rows]])

    x0 = None
    if x_start is not None:
        candidate = np.clip(np.asarray(x_start, dtype=float)[free], lbf, ubf)
        if _feasible(candidate, G, h, A_eq_r, b_eq_r):
            x0 = candidate
    if x0 is None:
        x0 = _phase_one(cf, A_ub_r, b_ub_r, A_eq_r, b_eq_r, lbf, ubf)
        if x0 is None:
            return _INFEASIBLE

    hdiag = 2.0 * qf
    max_iter = 20 * (nf + G.shape[0]) + 100
    xf, lam, eq_rows, work, iterations = _active_set(hdiag, cf, G, h, A_eq_r, x0, max_iter)

    n_eq = len(eq_rows)
    mu_full = np.zeros(G.shape[0])
    mu_full[work] = lam[n_eq:]
    grad = hdiag * xf + cf
    stat = grad + G.T @ mu_full
    if n_eq:
        stat = stat + A_eq_r[eq_rows].T @ lam[:n_eq]
    resid_ineq = G @ xf - h
    primal = max(float(np.max(resid_ineq, initial=0.0)),
                 _inf_norm(A_eq_r @ xf - b_eq_r) if A_eq_r.shape[0] else 0.0)
    kkt = KktResiduals(
        stationarity=_inf_norm(stat),
        primal=max(primal, 0.0),
        complementarity=_inf_norm(mu_full * resid_ineq),
    )
    x[free] = xf
    obj = float(q @ (x * x) + c @ x + constant)
    if kkt.worst() > KKT_TOL * max(1.0, _inf_norm(grad)):
        logger.warning("QP accepted with KKT residual %.3g", kkt.worst())
    return QpResult(feasible=True, x=x, objective=obj, iterations=iterations, kkt=kkt)


class ModelRelaxation:
    """Continuous relaxation of a MiqpModel under node-specific bounds"""

    def __init__(self, model):
        self.model = model
        self.A_ub, self.b_ub, self.A_eq, self.b_eq = model.dense_rows()
        self.solves = 0

    def solve(self, lower: np.ndarray, upper: np.ndarray,
              x_start: Optional[np.ndarray] = None) -> QpResult:
        self.solves += 1
        m = self.model
        return solve_qp(m.quad_diag, m.lin_cost, self.A_ub, self.b_ub, self.A_eq, self.b_eq,
                        lower, upper, constant=m.constant, x_start=x_start)
