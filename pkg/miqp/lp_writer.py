"""
CPLEX LP text export of a MiqpModel, for solving large instances externally
"""
import logging
from typing import List

from miqp.model import MiqpModel, Relation

logger = logging.getLogger(__name__)

# placeholder variable fixed at 1, used for objective constants and empty bodies
ONE_VAR_CONSTANT = "ONE_VAR_CONSTANT"

_COEF = "%+.12g %s\n"
_NUM = "%.12g"


def _no_negative_zero(value: float) -> float:
    return 0.0 if value == 0.0 else value


def _bound(value: float) -> str:
    if value == float("inf"):
        return "+inf"
    if value == float("-inf"):
        return "-inf"
    return _NUM % _no_negative_zero(value)


def export_lp(m: MiqpModel) -> str:
    """
    Render the model in LP format

    Objective quadratic terms go in a '[ ... ] / 2' block with doubled
    coefficients; constraint rows are named by their tags.
    """
    out: List[str] = []
    out.append(f"\\* Problem: {m.name} *\\\n")
    out.append(f"\\* Variables: {m.n_vars} ({m.n_cont} continuous, {m.n_bin} binary) *\\\n")
    out.append("\n")

    out.append("minimize\n")
    out.append("obj:\n")
    linear = [(i, c) for i, c in enumerate(m.lin_cost) if c != 0.0]
    quadratic = [(i, q) for i, q in enumerate(m.quad_diag) if q != 0.0]
    for i, c in linear:
        out.append(_COEF % (c, m.names[i]))
    needs_constant = m.constant != 0.0 or not (linear or quadratic)
    if needs_constant:
        out.append(_COEF % (_no_negative_zero(m.constant), ONE_VAR_CONSTANT))
    if quadratic:
        out.append("+ [\n")
        for i, q in quadratic:
            out.append("%+.12g %s ^ 2\n" % (2.0 * q, m.names[i]))
        out.append("] / 2\n")
    out.append("\n")

    out.append("subject to\n")
    if not m.rows:
        logger.warning("model %s has no constraint rows", m.name)
    for row in m.rows:
        out.append(f"{row.tag}:\n")
        if row.var_indices:
            for i, c in zip(row.var_indices, row.coefs):
                out.append(_COEF % (c, m.names[i]))
        else:
            out.append(_COEF % (0.0, ONE_VAR_CONSTANT))
            needs_constant = True
        relation = {Relation.LE: "<=", Relation.GE: ">=", Relation.EQ: "="}[row.relation]
        out.append(f"{relation} {_NUM % _no_negative_zero(row.rhs)}\n\n")

    out.append("bounds\n")
    for i, name in enumerate(m.names):
        out.append(f"   {_bound(m.lower[i])} <= {name} <= {_bound(m.upper[i])}\n")
    if needs_constant:
        out.append(f"   1 <= {ONE_VAR_CONSTANT} <= 1\n")

    if m.n_bin:
        out.append("binary\n")
        for name in m.names[m.n_cont:]:
            out.append(f"  {name}\n")

    out.append("end\n")
    return "".join(out)


def write_lp(m: MiqpModel, path: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(export_lp(m))
