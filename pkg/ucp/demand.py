"""
Demand profiles: CSV ingestion, additive mapping and synthetic generation

Sign convention for the additive form g(x) <= b(delta): demand rows
sum_j P_{j,t} >= P^d_t become g_t(x) = -sum_j P_{j,t} <= b_t = -P^d_t.
The dominant scenario of hour t is therefore the day with the largest load.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from certificates.scenario_core import ScenarioSet
from utils.csv_io import read_matrix, write_matrix
from utils.errors import DimensionMismatchError, ParameterError, ScenarioParseError

logger = logging.getLogger(__name__)

# morning and evening peaks (hour of day) and their widths (hours)
_PEAKS = ((9.0, 2.5, 0.85), (20.0, 2.0, 1.0))
_SEASON_OFFSETS = (1.0, 0.0, -1.0, 0.0)
_DAYS_PER_SEASON = 91
# day-level shift std per unit of hourly noise std when day_sd is not given
DAY_SD_PER_NOISE_SD = 10.0


@dataclass(frozen=True)
class DemandData:
    """N x T matrix of demand profiles in GW; N may be 0"""
    profiles: np.ndarray

    def __post_init__(self):
        arr = np.array(self.profiles, dtype=float, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"demand profiles must be 2-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("demand profiles contain non-finite values")
        if np.any(arr < 0.0):
            raise ParameterError("demand profiles contain negative values")
        arr.setflags(write=False)
        object.__setattr__(self, "profiles", arr)

    @property
    def n_days(self) -> int:
        return self.profiles.shape[0]

    @property
    def horizon(self) -> int:
        return self.profiles.shape[1]

    @staticmethod
    def header(t: int) -> List[str]:
        return [f"h{i}" for i in range(t)]

    @classmethod
    def from_csv(cls, path: str, horizon: Optional[int] = None) -> "DemandData":
        header, matrix = read_matrix(path)
        if horizon is not None and matrix.shape[1] != horizon:
            raise ScenarioParseError(path, 1, f"expected {horizon} hourly columns, found {matrix.shape[1]}")
        if np.any(matrix < 0.0):
            line = int(np.flatnonzero(np.any(matrix < 0.0, axis=1))[0]) + (2 if header else 1)
            raise ScenarioParseError(path, line, "negative demand value")
        return cls(matrix)

    def to_csv(self, path: str):
        write_matrix(path, self.profiles, self.header(self.horizon))

    def hourly_stats(self) -> Dict[str, np.ndarray]:
        """Per-hour min/mean/max; empty arrays when there are no days"""
        if self.n_days == 0:
            empty = np.empty(0)
            return {"min": empty, "mean": empty, "max": empty}
        return {
            "min": self.profiles.min(axis=0),
            "mean": self.profiles.mean(axis=0),
            "max": self.profiles.max(axis=0),
        }


def to_additive(d: DemandData) -> ScenarioSet:
    """b-values of the demand rows: the sign-flipped profiles"""
    return ScenarioSet(-d.profiles)


def daily_shape(t: int) -> np.ndarray:
    """Morning/evening double-peak shape on t slots, scaled into [0, 1]"""
    hours = np.arange(t) * (24.0 / t)
    shape = np.zeros(t)
    for center, width, height in _PEAKS:
        dist = np.abs(hours - center)
        dist = np.minimum(dist, 24.0 - dist)
        shape = np.maximum(shape, height * np.exp(-0.5 * (dist / width) ** 2))
    return shape


def synth_demand(seed: int, n_days: int, t: int = 24, base: float = 22.0, daily_amp: float = 8.0,
                 noise_sd: float = 0.15, season_amp: float = 3.0,
                 day_sd: Optional[float] = None) -> DemandData:
    """
    Deterministic synthetic demand

    profile(i, h) = base + daily_amp * shape(h) + season_amp * offset(season of day i)
                    + day-level N(0, day_sd) + hourly N(0, noise_sd), clamped at 0.
    Seasons are blocks of 91 days. day_sd defaults to 10 * noise_sd, so
    noise_sd = 0 alone gives every day of a season the same profile.
    """
    if n_days < 0 or t < 1:
        raise ParameterError(f"need n_days >= 0 and t >= 1, got n_days={n_days}, t={t}")
    if day_sd is None:
        day_sd = DAY_SD_PER_NOISE_SD * noise_sd
    if min(base, daily_amp, noise_sd, season_amp, day_sd) < 0.0:
        raise ParameterError("shape and noise parameters must be non-negative")
    rng = np.random.default_rng(seed)
    days = np.arange(n_days)
    season = np.asarray(_SEASON_OFFSETS)[(days // _DAYS_PER_SEASON) % 4]
    level = base + season_amp * season + rng.normal(0.0, day_sd, size=n_days)
    hourly = rng.normal(0.0, noise_sd, size=(n_days, t))
    profiles = level[:, None] + daily_amp * daily_shape(t)[None, :] + hourly
    return DemandData(np.maximum(profiles, 0.0))


class DemandModel:
    """
    Stationary i.i.d. daily demand: every draw picks a random point of the
    seasonal cycle, a day-level shift and hourly noise
    """

    def __init__(self, t: int, base: float = 22.0, daily_amp: float = 8.0, noise_sd: float = 0.15,
                 season_amp: float = 3.0, day_sd: Optional[float] = None):
        if t < 1:
            raise ParameterError(f"t must be positive, got {t}")
        self.t = t
        self.base = base
        self.daily_amp = daily_amp
        self.noise_sd = noise_sd
        self.season_amp = season_amp
        self.day_sd = DAY_SD_PER_NOISE_SD * noise_sd if day_sd is None else day_sd
        self._shape = daily_shape(t)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        phase = rng.uniform(0.0, 2.0 * np.pi, size=count)
        level = (self.base + self.season_amp * np.cos(phase)
                 + rng.normal(0.0, self.day_sd, size=count))
        hourly = rng.normal(0.0, self.noise_sd, size=(count, self.t))
        return np.maximum(level[:, None] + self.daily_amp * self._shape[None, :] + hourly, 0.0)

    def sample_b(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draws already mapped to b-values (negated demand)"""
        return -self.sample(rng, count)

    def draw_data(self, seed: int, n_days: int) -> DemandData:
        return DemandData(self.sample(np.random.default_rng(seed), n_days))


def split_train_validation(data: DemandData, seed: int,
                           fraction: float = 0.5) -> Tuple[DemandData, DemandData]:
    """Random split; `fraction` of the days (rounded down) go to validation"""
    if not 0.0 < fraction < 1.0:
        raise ParameterError(f"validation fraction must lie in (0,1), got {fraction}")
    order = np.random.default_rng(seed).permutation(data.n_days)
    n_val = int(np.floor(fraction * data.n_days))
    val, train = order[:n_val], order[n_val:]
    return DemandData(data.profiles[np.sort(train)]), DemandData(data.profiles[np.sort(val)])
