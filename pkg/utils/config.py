"""
Validated parameter records for the command-line surface
"""
from enum import Enum
from typing import Optional, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from utils.errors import ParameterError

ModelT = TypeVar("ModelT", bound=BaseModel)


def describe_validation_error(exc: ValidationError) -> str:
    """Flatten a pydantic error into 'field: message; field: message'"""
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "value"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def validated(model_cls: Type[ModelT], **values) -> ModelT:
    """
    Build a pydantic record, turning validation failures into ParameterError

    Args:
        model_cls: pydantic model class to instantiate
        **values: field values

    Returns:
        The validated record
    """
    try:
        return model_cls(**values)
    except ValidationError as exc:
        raise ParameterError(
            f"invalid {model_cls.__name__}: {describe_validation_error(exc)}"
        ) from exc


class SizeMode(str, Enum):
    ONESHOT = "oneshot"
    EPSBASED = "epsbased"
    INCREMENTAL_SCHEDULE = "incremental-schedule"


class TieBreak(str, Enum):
    SMALLEST_INDEX = "smallest_index"
    MIN_COMPLEXITY = "min_complexity"


class _RunConfig(BaseModel):
    """Common base: run configs are immutable once validated"""
    model_config = ConfigDict(frozen=True, extra="forbid")


class CertifyConfig(_RunConfig):
    scenarios_path: str
    beta: float = Field(..., gt=0.0, lt=1.0, description="confidence parameter")
    tie_break: TieBreak = TieBreak.SMALLEST_INDEX
    csv_path: Optional[str] = None


class SizeConfig(_RunConfig):
    q: int = Field(..., ge=1, description="number of uncertain constraints")
    eps_bar: float = Field(..., gt=0.0, lt=1.0, description="target risk level")
    beta: float = Field(..., gt=0.0, lt=1.0)
    mode: SizeMode = SizeMode.ONESHOT
    csv_path: Optional[str] = None


class RunIncrementalConfig(_RunConfig):
    units_path: str
    demand_csv: Optional[str] = None
    eps_bar: float = Field(..., gt=0.0, lt=1.0)
    beta: float = Field(..., gt=0.0, lt=1.0)
    seed: int = Field(..., ge=0)
    runs: int = Field(1, ge=1)
    export_lp: Optional[str] = None
    convex_only: bool = False
    gap_tol: float = Field(1e-6, ge=0.0)
    node_limit: int = Field(20000, ge=1)
    validation_csv: Optional[str] = None
    compare_oneshot: bool = False
    base: float = Field(22.0, ge=0.0)
    daily_amp: float = Field(8.0, ge=0.0)
    season_amp: float = Field(3.0, ge=0.0)
    day_sd: Optional[float] = Field(None, ge=0.0)
    noise_sd: float = Field(0.15, ge=0.0)
    solution_out: Optional[str] = None
    csv_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_modes(self):
        if self.demand_csv is not None and self.runs > 1:
            raise ValueError("a demand CSV is a single stream; --runs must be 1")
        if self.export_lp is not None and self.runs > 1:
            raise ValueError("export mode writes one model; --runs must be 1")
        if self.compare_oneshot and self.export_lp is not None:
            raise ValueError("--compare-oneshot needs a solve, not export mode")
        if self.solution_out is not None and self.runs > 1:
            raise ValueError("--solution-out records a single run; --runs must be 1")
        return self


class RiskConfig(_RunConfig):
    solution_path: str
    validation_csv: str
    training_csv: Optional[str] = None
    csv_path: Optional[str] = None


class SupportConfig(_RunConfig):
    units_path: Optional[str] = None
    demand_csv: str
    beta: float = Field(0.05, gt=0.0, lt=1.0)
    equality_tol: float = Field(1e-6, gt=0.0)
    gap_tol: float = Field(1e-6, ge=0.0)
    node_limit: int = Field(20000, ge=1)
    convex_only: bool = False
    validation_csv: Optional[str] = None
    validation_fraction: float = Field(0.0, ge=0.0, lt=1.0)
    seed: Optional[int] = Field(None, ge=0)
    csv_path: Optional[str] = None

    @model_validator(mode="after")
    def _check_sources(self):
        if self.units_path is None and not self.convex_only:
            raise ValueError("--units is required unless --convex-only is given")
        if self.validation_fraction > 0.0 and self.seed is None:
            raise ValueError("--validation-fraction needs --seed")
        if self.validation_fraction > 0.0 and self.validation_csv is not None:
            raise ValueError("give either --validation or --validation-fraction, not both")
        return self


class GenDemandConfig(_RunConfig):
    seed: int = Field(..., ge=0)
    n_days: int = Field(..., ge=0)
    t: int = Field(24, ge=1)
    base: float = Field(22.0, ge=0.0)
    daily_amp: float = Field(8.0, ge=0.0)
    season_amp: float = Field(3.0, ge=0.0)
    day_sd: Optional[float] = Field(None, ge=0.0)
    noise_sd: float = Field(0.15, ge=0.0)
    out_path: str
