"""
Mixed-binary quadratic program with a diagonal convex objective and linear rows
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import ModelError

# absolute tolerance for accepting a point as feasible
FEASIBILITY_TOL = 1e-7


class Relation(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass(frozen=True)
class ConstraintRow:
    """sum_i coef_i x_{var_i} (relation) rhs, named by tag"""
    var_indices: Tuple[int, ...]
    coefs: Tuple[float, ...]
    relation: Relation
    rhs: float
    tag: str


@dataclass(frozen=True)
class MiqpModel:
    """
    min sum_i quad_diag_i x_i^2 + lin_cost_i x_i + constant

    Continuous variables come first (indices 0..n_cont-1), binaries after.
    """
    names: Tuple[str, ...]
    n_cont: int
    n_bin: int
    quad_diag: np.ndarray
    lin_cost: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: Tuple[ConstraintRow, ...] = ()
    constant: float = 0.0
    name: str = "model"

    def __post_init__(self):
        n = self.n_cont + self.n_bin
        for attr in ("quad_diag", "lin_cost", "lower", "upper"):
            arr = np.array(getattr(self, attr), dtype=float, copy=True)
            if arr.shape != (n,):
                raise ModelError(f"{attr} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        if len(self.names) != n:
            raise ModelError(f"{len(self.names)} names for {n} variables")
        if np.any(self.quad_diag < 0.0):
            raise ModelError("quadratic coefficients must be non-negative")
        if np.any(self.lower > self.upper):
            raise ModelError("a variable has lower bound above upper bound")
        binaries = slice(self.n_cont, n)
        if np.any(self.lower[binaries] < 0.0) or np.any(self.upper[binaries] > 1.0):
            raise ModelError("binary variables must have bounds within [0, 1]")
        for row in self.rows:
            if len(row.var_indices) != len(row.coefs):
                raise ModelError(f"row {row.tag}: index/coefficient length mismatch")
            if any(i < 0 or i >= n for i in row.var_indices):
                raise ModelError(f"row {row.tag}: variable index out of range")

    @property
    def n_vars(self) -> int:
        return self.n_cont + self.n_bin

    @property
    def binary_slice(self) -> slice:
        return slice(self.n_cont, self.n_vars)

    def objective(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.quad_diag @ (x * x) + self.lin_cost @ x + self.constant)

    def dense_rows(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(A_ub, b_ub, A_eq, b_eq) with >= rows negated into <= form"""
        ub_rows: List[np.ndarray] = []
        ub_rhs: List[float] = []
        eq_rows: List[np.ndarray] = []
        eq_rhs: List[float] = []
        for row in self.rows:
            dense = np.zeros(self.n_vars)
            np.add.at(dense, np.asarray(row.var_indices, dtype=int), row.coefs)
            if row.relation is Relation.EQ:
                eq_rows.append(dense)
                eq_rhs.append(row.rhs)
            elif row.relation is Relation.LE:
                ub_rows.append(dense)
                ub_rhs.append(row.rhs)
            else:
                ub_rows.append(-dense)
                ub_rhs.append(-row.rhs)
        shape = (0, self.n_vars)
        return (
            np.array(ub_rows).reshape(-1, self.n_vars) if ub_rows else np.empty(shape),
            np.array(ub_rhs, dtype=float),
            np.array(eq_rows).reshape(-1, self.n_vars) if eq_rows else np.empty(shape),
            np.array(eq_rhs, dtype=float),
        )

    def violated_rows(self, x: np.ndarray, tol: float = FEASIBILITY_TOL) -> List[str]:
        """Tags of rows and bounds violated by x beyond tol"""
        x = np.asarray(x, dtype=float)
        bad = []
        for row in self.rows:
            lhs = float(np.dot(row.coefs, x[list(row.var_indices)])) if row.var_indices else 0.0
            if row.relation is Relation.LE and lhs > row.rhs + tol:
                bad.append(row.tag)
            elif row.relation is Relation.GE and lhs < row.rhs - tol:
                bad.append(row.tag)
            elif row.relation is Relation.EQ and abs(lhs - row.rhs) > tol:
                bad.append(row.tag)
        for i in np.flatnonzero((x < self.lower - tol) | (x > self.upper + tol)):
            bad.append(f"bound[{self.names[i]}]")
        return bad


class MiqpBuilder:
    """Incremental construction of a MiqpModel; continuous variables must precede binaries"""

    def __init__(self, name: str = "model"):
        self.name = name
        self._names: List[str] = []
        self._index: Dict[str, int] = {}
        self._quad: List[float] = []
        self._lin: List[float] = []
        self._lower: List[float] = []
        self._upper: List[float] = []
        self._n_bin = 0
        self._rows: List[ConstraintRow] = []
        self.constant = 0.0

    def _add(self, name: str, lower: float, upper: float, quad: float, lin: float) -> int:
        if name in self._index:
            raise ModelError(f"duplicate variable name {name}")
        self._index[name] = len(self._names)
        self._names.append(name)
        self._lower.append(lower)
        self._upper.append(upper)
        self._quad.append(quad)
        self._lin.append(lin)
        return self._index[name]

    def add_continuous(self, name: str, lower: float = 0.0, upper: float = np.inf,
                       quad: float = 0.0, lin: float = 0.0) -> int:
        if self._n_bin:
            raise ModelError("continuous variables must be added before binaries")
        return self._add(name, lower, upper, quad, lin)

    def add_binary(self, name: str, lin: float = 0.0) -> int:
        self._n_bin += 1
        return self._add(name, 0.0, 1.0, 0.0, lin)

    def index(self, name: str) -> int:
        return self._index[name]

    def add_row(self, terms: Sequence[Tuple[int, float]], relation: Relation, rhs: float, tag: str):
        merged: Dict[int, float] = {}
        for var, coef in terms:
            merged[var] = merged.get(var, 0.0) + coef
        items = [(v, c) for v, c in merged.items() if c != 0.0]
        self._rows.append(ConstraintRow(
            var_indices=tuple(v for v, _ in items), coefs=tuple(float(c) for _, c in items),
            relation=Relation(relation), rhs=float(rhs), tag=tag,
        ))

    def build(self) -> MiqpModel:
        n = len(self._names)
        return MiqpModel(
            names=tuple(self._names), n_cont=n - self._n_bin, n_bin=self._n_bin,
            quad_diag=np.array(self._quad, dtype=float).reshape(n),
            lin_cost=np.array(self._lin, dtype=float).reshape(n),
            lower=np.array(self._lower, dtype=float).reshape(n),
            upper=np.array(self._upper, dtype=float).reshape(n),
            rows=tuple(self._rows), constant=self.constant, name=self.name,
        )


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    NODE_LIMIT = "NodeLimit"
    SOLVER_ERROR = "SolverError"


@dataclass(frozen=True)
class SolveOutcome:
    status: SolveStatus
    assignment: Optional[np.ndarray]
    objective: float
    nodes_explored: int
    best_bound: float
    qp_solves: int = 0
    tie: bool = False
    notes: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def has_solution(self) -> bool:
        return self.assignment is not None
