"""
Generation-unit parameters and the unit-parameter JSON file
"""
import json
import os
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from utils.errors import UnitConfigError

REQUIRED_KEYS = (
    "a", "b", "c", "c_u", "c_d", "ramp_down", "ramp_up", "t_up", "t_down", "zones",
)


class GenUnit(BaseModel):
    """One thermal generation unit; power in GW, time in hours, cost in euros"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "unit"
    a: float = Field(..., ge=0.0, description="quadratic fuel cost, cost/GW^2")
    b: float = Field(..., description="linear fuel cost, cost/GW")
    c: float = Field(..., description="fixed cost while committed, cost")
    c_u: float = Field(..., description="startup cost, cost")
    c_d: float = Field(..., description="shutdown cost, cost")
    ramp_down: float = Field(..., ge=0.0, description="max decrease per slot, GW/h")
    ramp_up: float = Field(..., ge=0.0, description="max increase per slot, GW/h")
    t_up: int = Field(..., ge=1, description="minimum on-time, h")
    t_down: int = Field(..., ge=1, description="minimum off-time, h")
    zones: Tuple[Tuple[float, float], ...] = Field(..., min_length=1,
                                                  description="operating zones [p_min, p_max], GW")

    @field_validator("zones")
    @classmethod
    def _zones_sorted_disjoint(cls, zones):
        for p_min, p_max in zones:
            if p_min < 0.0:
                raise ValueError(f"zone lower limit {p_min} is negative")
            if p_min > p_max:
                raise ValueError(f"zone [{p_min}, {p_max}] has p_min > p_max")
        for (_, hi), (lo, _) in zip(zones, zones[1:]):
            if not hi < lo:
                raise ValueError("zones must be sorted ascending and non-overlapping")
        return zones

    @property
    def n_zones(self) -> int:
        return len(self.zones)

    @property
    def capacity(self) -> float:
        return self.zones[-1][1]


class UcInstance(BaseModel):
    """Units plus the horizon T (number of one-hour slots)"""
    model_config = ConfigDict(frozen=True)

    units: Tuple[GenUnit, ...] = Field(..., min_length=1)
    horizon: int = Field(..., ge=2)

    @model_validator(mode="after")
    def _unique_names(self):
        names = [u.name for u in self.units]
        if len(set(names)) != len(names):
            raise ValueError(f"unit names must be unique, got {names}")
        return self

    @property
    def n_p(self) -> int:
        return len(self.units)

    @property
    def total_capacity(self) -> float:
        return float(sum(u.capacity for u in self.units))

    def zone_counts(self) -> List[int]:
        return [u.n_zones for u in self.units]

    def n_binaries(self) -> int:
        return sum(u.n_zones + 2 for u in self.units) * self.horizon


def _key_path(prefix: str, loc) -> str:
    parts = [prefix] + [str(p) for p in loc if not isinstance(p, int)]
    return ".".join(p for p in parts if p)


def parse_instance(data: Dict[str, Any]) -> UcInstance:
    """
    Build a UcInstance from the decoded unit-parameter document

    Expected layout: {"horizon": T, "units": {name: {a, b, c, c_u, c_d,
    ramp_down, ramp_up, t_up, t_down, zones}}, "metadata": {...}}.
    """
    if not isinstance(data, dict):
        raise UnitConfigError("<root>", "document must be a JSON object")
    if "horizon" not in data:
        raise UnitConfigError("horizon", "missing required key")
    units_section = data.get("units")
    if not isinstance(units_section, dict) or not units_section:
        raise UnitConfigError("units", "must be a non-empty object keyed by unit name")

    units = []
    for name, section in units_section.items():
        if not isinstance(section, dict):
            raise UnitConfigError(f"units.{name}", "must be an object")
        for key in REQUIRED_KEYS:
            if key not in section:
                raise UnitConfigError(f"units.{name}.{key}", "missing required key")
        try:
            units.append(GenUnit(name=name, **section))
        except ValidationError as exc:
            err = exc.errors()[0]
            raise UnitConfigError(_key_path(f"units.{name}", err["loc"]), err["msg"]) from exc
    try:
        return UcInstance(units=tuple(units), horizon=data["horizon"])
    except ValidationError as exc:
        err = exc.errors()[0]
        raise UnitConfigError(_key_path("", err["loc"]) or "units", err["msg"]) from exc


def load_instance(path: str) -> UcInstance:
    """Read a unit-parameter JSON file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise UnitConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UnitConfigError("<root>", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_instance(data)


def default_instance() -> UcInstance:
    """Case-study instance shipped next to this module (four units, T = 24)"""
    return load_instance(os.path.join(os.path.dirname(__file__), "config.json"))


def desk_instance() -> UcInstance:
    """Desk-scale instance the internal branch-and-bound solves comfortably"""
    return load_instance(os.path.join(os.path.dirname(__file__), "desk_config.json"))


def random_instance(rng: np.random.Generator, n_p: int, horizon: int, n_zones: int = 1) -> UcInstance:
    """Random feasible-looking instance for property tests and experiments"""
    units = []
    for j in range(n_p):
        edges = np.sort(rng.uniform(0.5, 12.0, size=2 * n_zones))
        zones = tuple((float(edges[2 * z]), float(edges[2 * z + 1])) for z in range(n_zones))
        units.append(GenUnit(
            name=f"gu{j + 1}",
            a=float(rng.uniform(0.05, 1.0)), b=float(rng.uniform(0.1, 2.0)),
            c=float(rng.uniform(0.1, 1.0)), c_u=float(rng.uniform(0.1, 1.0)),
            c_d=float(rng.uniform(0.1, 1.0)),
            ramp_down=float(rng.uniform(2.0, 12.0)), ramp_up=float(rng.uniform(2.0, 12.0)),
            t_up=int(rng.integers(1, horizon + 1)), t_down=int(rng.integers(1, horizon + 1)),
            zones=zones,
        ))
    return UcInstance(units=tuple(units), horizon=horizon)
