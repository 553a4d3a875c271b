"""
Unit-commitment scenario program compiled to a MiqpModel

Variables, in model order: P_{j,t} (continuous), then y_{j,z,t}, u_{j,t},
d_{j,t} (binary). Units j and zones z are numbered from 1, slots t from 0.
Time indices outside [0, T-1] wrap modulo T.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from certificates.scenario_core import Decision
from miqp.model import MiqpBuilder, MiqpModel, Relation
from ucp.units import UcInstance
from utils.errors import DimensionMismatchError, ModelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UcLayout:
    """Variable indices of a compiled instance"""
    power: np.ndarray            # (n_p, T)
    zone_on: Tuple[np.ndarray, ...]  # per unit (Z_j, T)
    startup: np.ndarray          # (n_p, T)
    shutdown: np.ndarray         # (n_p, T)

    @property
    def n_vars(self) -> int:
        return int(self.shutdown.max()) + 1


@dataclass(frozen=True)
class UcSolution:
    power: np.ndarray
    zone_on: Tuple[np.ndarray, ...]
    startup: np.ndarray
    shutdown: np.ndarray
    objective: float

    def committed(self) -> np.ndarray:
        """Y_{j,t} = sum_z y_{j,z,t}"""
        return np.vstack([z.sum(axis=0) for z in self.zone_on])

    def total_generation(self) -> np.ndarray:
        return self.power.sum(axis=0)

    def decision(self) -> Decision:
        """Constraint image of the demand rows: g_t = -sum_j P_{j,t}"""
        return Decision(-self.total_generation())


def variable_layout(inst: UcInstance) -> UcLayout:
    n_p, T = inst.n_p, inst.horizon
    power = np.arange(n_p * T).reshape(n_p, T)
    nxt = n_p * T
    zone_on = []
    for unit in inst.units:
        size = unit.n_zones * T
        zone_on.append(np.arange(nxt, nxt + size).reshape(unit.n_zones, T))
        nxt += size
    startup = np.arange(nxt, nxt + n_p * T).reshape(n_p, T)
    shutdown = startup + n_p * T
    return UcLayout(power=power, zone_on=tuple(zone_on), startup=startup, shutdown=shutdown)


def demand_rhs(xi: Sequence[float]) -> np.ndarray:
    """Required generation per slot from reduced right-hand sides (xi = -max demand)"""
    xi = np.asarray(xi, dtype=float)
    demand = np.where(np.isfinite(xi), -xi, 0.0)
    # P >= 0 makes a non-positive requirement equivalent to none
    return np.maximum(demand, 0.0)


def check_horizon(inst: UcInstance):
    for j, unit in enumerate(inst.units, start=1):
        if unit.t_up > inst.horizon or unit.t_down > inst.horizon:
            raise ModelError(
                f"unit {j} ({unit.name}): minimum up/down time "
                f"({unit.t_up}, {unit.t_down}) exceeds horizon T={inst.horizon}"
            )


def build_miqp(inst: UcInstance, xi: Sequence[float], name: str = "uc") -> MiqpModel:
    """
    Reduced unit-commitment MIQP for right-hand sides xi

    Demand enters as sum_j P_{j,t} >= -xi_t, one row per slot. Row names
    follow c<eq>_<side>_j<j>_t<t>[_tau<tau>].
    """
    T = inst.horizon
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (T,):
        raise DimensionMismatchError(f"xi must have length T={T}, got shape {xi.shape}")
    check_horizon(inst)
    demand = demand_rhs(xi)

    mb = MiqpBuilder(name)
    for j, unit in enumerate(inst.units, start=1):
        for t in range(T):
            mb.add_continuous(f"P_{j}_{t}", lower=0.0, upper=unit.capacity, quad=unit.a, lin=unit.b)
    for j, unit in enumerate(inst.units, start=1):
        for z in range(1, unit.n_zones + 1):
            for t in range(T):
                mb.add_binary(f"y_{j}_{z}_{t}", lin=unit.c)
    for j, unit in enumerate(inst.units, start=1):
        for t in range(T):
            mb.add_binary(f"u_{j}_{t}", lin=unit.c_u)
    for j, unit in enumerate(inst.units, start=1):
        for t in range(T):
            mb.add_binary(f"d_{j}_{t}", lin=unit.c_d)

    P = lambda j, t: mb.index(f"P_{j}_{t % T}")
    u = lambda j, t: mb.index(f"u_{j}_{t % T}")
    d = lambda j, t: mb.index(f"d_{j}_{t % T}")

    def Y(j: int, t: int, sign: float = 1.0) -> List[Tuple[int, float]]:
        return [(mb.index(f"y_{j}_{z}_{t % T}"), sign)
                for z in range(1, inst.units[j - 1].n_zones + 1)]

    for t in range(T):
        mb.add_row([(P(j, t), 1.0) for j in range(1, inst.n_p + 1)],
                   Relation.GE, demand[t], f"c15b_t{t}")

    for j, unit in enumerate(inst.units, start=1):
        for t in range(T):
            mb.add_row([(P(j, t), 1.0), (P(j, t - 1), -1.0)], Relation.GE, -unit.ramp_down,
                       f"c15c_lo_j{j}_t{t}")
            mb.add_row([(P(j, t), 1.0), (P(j, t - 1), -1.0)], Relation.LE, unit.ramp_up,
                       f"c15c_hi_j{j}_t{t}")
        for t in range(T):
            zones = list(enumerate(unit.zones, start=1))
            mb.add_row([(P(j, t), 1.0)] + [(mb.index(f"y_{j}_{z}_{t}"), -lo) for z, (lo, _) in zones],
                       Relation.GE, 0.0, f"c15d_lo_j{j}_t{t}")
            mb.add_row([(P(j, t), 1.0)] + [(mb.index(f"y_{j}_{z}_{t}"), -hi) for z, (_, hi) in zones],
                       Relation.LE, 0.0, f"c15d_hi_j{j}_t{t}")
        for t in range(T):
            mb.add_row(Y(j, t), Relation.LE, 1.0, f"c15f_j{j}_t{t}")
        for t in range(T):
            mb.add_row(Y(j, t) + Y(j, t - 1, -1.0) + [(u(j, t), -1.0)], Relation.LE, 0.0,
                       f"c15g_lo_j{j}_t{t}")
            mb.add_row([(u(j, t), 1.0)] + Y(j, t, -1.0), Relation.LE, 0.0, f"c15g_hi_j{j}_t{t}")
        for t in range(T):
            mb.add_row([(u(j, t), 1.0)] + Y(j, t - 1), Relation.LE, 1.0, f"c15h_j{j}_t{t}")
        for t in range(T):
            for tau in range(t, t + unit.t_up):
                mb.add_row([(u(j, t), 1.0)] + Y(j, tau, -1.0), Relation.LE, 0.0,
                           f"c15i_j{j}_t{t}_tau{tau % T}")
        for t in range(T):
            mb.add_row(Y(j, t - 1) + Y(j, t, -1.0) + [(d(j, t), -1.0)], Relation.LE, 0.0,
                       f"c15j_lo_j{j}_t{t}")
            mb.add_row([(d(j, t), 1.0)] + Y(j, t - 1, -1.0), Relation.LE, 0.0, f"c15j_hi_j{j}_t{t}")
        for t in range(T):
            mb.add_row([(d(j, t), 1.0)] + Y(j, t), Relation.LE, 1.0, f"c15k_j{j}_t{t}")
        for t in range(T):
            for tau in range(t, t + unit.t_down):
                mb.add_row(Y(j, tau) + [(d(j, t), 1.0)], Relation.LE, 1.0,
                           f"c15l_j{j}_t{t}_tau{tau % T}")

    model = mb.build()
    logger.debug("built %s: %d variables (%d continuous, %d binary), %d rows",
                 name, model.n_vars, model.n_cont, model.n_bin, len(model.rows))
    return model


def decode_solution(inst: UcInstance, x: np.ndarray, objective: float) -> UcSolution:
    """Split a model assignment into the per-unit matrices"""
    layout = variable_layout(inst)
    x = np.asarray(x, dtype=float)
    if x.shape != (layout.n_vars,):
        raise DimensionMismatchError(f"assignment has shape {x.shape}, expected ({layout.n_vars},)")
    binary = lambda idx: np.round(x[idx]).astype(int)
    return UcSolution(
        power=x[layout.power].copy(),
        zone_on=tuple(binary(z) for z in layout.zone_on),
        startup=binary(layout.startup),
        shutdown=binary(layout.shutdown),
        objective=float(objective),
    )


def encode_solution(inst: UcInstance, sol: UcSolution) -> np.ndarray:
    """Inverse of decode_solution"""
    layout = variable_layout(inst)
    x = np.zeros(layout.n_vars)
    x[layout.power] = sol.power
    for idx, z in zip(layout.zone_on, sol.zone_on):
        x[idx] = z
    x[layout.startup] = sol.startup
    x[layout.shutdown] = sol.shutdown
    return x


def objective_of(inst: UcInstance, sol: UcSolution) -> float:
    """Cost of a solution evaluated from the unit parameters"""
    total = 0.0
    Y = sol.committed()
    for j, unit in enumerate(inst.units):
        p = sol.power[j]
        total += float(np.sum(unit.a * p * p + unit.b * p + unit.c * Y[j]
                              + unit.c_u * sol.startup[j] + unit.c_d * sol.shutdown[j]))
    return total


def count_summary(model: MiqpModel) -> Dict[str, int]:
    return {"variables": model.n_vars, "continuous": model.n_cont,
            "binary": model.n_bin, "rows": len(model.rows)}
