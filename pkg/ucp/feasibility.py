"""
Direct verification of a unit-commitment solution against every model equation
"""
from typing import List, Sequence

import numpy as np

from miqp.model import FEASIBILITY_TOL
from ucp.model_builder import UcSolution, check_horizon, demand_rhs
from ucp.units import UcInstance
from utils.errors import DimensionMismatchError


def _check_shapes(inst: UcInstance, sol: UcSolution, xi: np.ndarray):
    n_p, T = inst.n_p, inst.horizon
    if xi.shape != (T,):
        raise DimensionMismatchError(f"xi must have length {T}, got shape {xi.shape}")
    for name in ("power", "startup", "shutdown"):
        if getattr(sol, name).shape != (n_p, T):
            raise DimensionMismatchError(f"{name} must have shape {(n_p, T)}")
    if len(sol.zone_on) != n_p or any(
            z.shape != (u.n_zones, T) for z, u in zip(sol.zone_on, inst.units)):
        raise DimensionMismatchError("zone_on does not match the units' zone counts")


def check_feasible(inst: UcInstance, sol: UcSolution, xi: Sequence[float],
                   tol: float = FEASIBILITY_TOL) -> List[str]:
    """
    Identifiers of violated constraints, e.g. '15f[j=1,t=3]'; empty iff feasible

    Continuous rows are checked within tol, binaries must be exactly 0 or 1.
    """
    xi = np.asarray(xi, dtype=float)
    _check_shapes(inst, sol, xi)
    check_horizon(inst)
    T = inst.horizon
    bad: List[str] = []

    for j, z_on in enumerate(sol.zone_on, start=1):
        for name, arr in (("y", z_on), ("u", sol.startup[j - 1]), ("d", sol.shutdown[j - 1])):
            if not np.all((arr == 0) | (arr == 1)):
                bad.append(f"domain[{name},j={j}]")

    demand = demand_rhs(xi)
    total = sol.total_generation()
    for t in range(T):
        if total[t] < demand[t] - tol:
            bad.append(f"15b[t={t}]")

    P = sol.power
    Y = sol.committed()
    u, d = sol.startup, sol.shutdown
    for jj, unit in enumerate(inst.units):
        j = jj + 1
        lo_z = np.array([z[0] for z in unit.zones])
        hi_z = np.array([z[1] for z in unit.zones])
        y = sol.zone_on[jj]
        for t in range(T):
            prev = (t - 1) % T
            step = P[jj, t] - P[jj, prev]
            if P[jj, t] < -tol or P[jj, t] > unit.capacity + tol:
                bad.append(f"domain[P,j={j},t={t}]")
            if step < -unit.ramp_down - tol or step > unit.ramp_up + tol:
                bad.append(f"15c[j={j},t={t}]")
            if P[jj, t] < lo_z @ y[:, t] - tol or P[jj, t] > hi_z @ y[:, t] + tol:
                bad.append(f"15d[j={j},t={t}]")
            if Y[jj, t] > 1:
                bad.append(f"15f[j={j},t={t}]")
            if Y[jj, t] - Y[jj, prev] > u[jj, t] or u[jj, t] > Y[jj, t]:
                bad.append(f"15g[j={j},t={t}]")
            if u[jj, t] + Y[jj, prev] > 1:
                bad.append(f"15h[j={j},t={t}]")
            for tau in range(t, t + unit.t_up):
                if Y[jj, tau % T] < u[jj, t]:
                    bad.append(f"15i[j={j},t={t},tau={tau % T}]")
            if Y[jj, prev] - Y[jj, t] > d[jj, t] or d[jj, t] > Y[jj, prev]:
                bad.append(f"15j[j={j},t={t}]")
            if d[jj, t] + Y[jj, t] > 1:
                bad.append(f"15k[j={j},t={t}]")
            for tau in range(t, t + unit.t_down):
                if Y[jj, tau % T] > 1 - d[jj, t]:
                    bad.append(f"15l[j={j},t={t},tau={tau % T}]")
    return bad
