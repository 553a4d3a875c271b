"""
Exception hierarchy shared by every scert package
"""
from typing import List, Optional


class ScertError(Exception):
    """Base class for all errors raised by scert"""


class ParameterError(ScertError, ValueError):
    """A numeric parameter is outside its admissible range"""


class DimensionMismatchError(ScertError, ValueError):
    """Vector or matrix shapes disagree"""


class EmptyScenarioSetError(ScertError, ValueError):
    """A scenario matrix has no rows"""


class ScenarioParseError(ScertError, ValueError):
    """A scenario or demand CSV could not be parsed"""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        self.reason = reason
        super().__init__(f"{path}:{line}: {reason}")


class ContractError(ScertError, RuntimeError):
    """A caller or a callback broke a documented pre/postcondition"""


class DataInsufficiencyError(ScertError, RuntimeError):
    """A scenario source ran out before enough rows were collected"""

    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(
            f"scenario source exhausted: {needed} rows needed, only {available} available"
        )


class ModelError(ScertError, ValueError):
    """An optimization model cannot be built as requested"""


class UnitConfigError(ScertError, ValueError):
    """The unit-parameter file is malformed"""

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"unit config key '{key}': {reason}")


class EnumerationCapError(ScertError, ValueError):
    """Exhaustive enumeration refused because the model has too many binaries"""

    def __init__(self, n_bin: int, cap: int):
        self.n_bin = n_bin
        self.cap = cap
        super().__init__(
            f"enumeration refused: model has {n_bin} binaries, cap is {cap}"
        )


class SolverCapError(ScertError, ValueError):
    """The internal branch-and-bound refuses models beyond desk scale"""

    def __init__(self, n_bin: int, cap: int):
        self.n_bin = n_bin
        self.cap = cap
        super().__init__(
            f"model has {n_bin} binaries, the internal solver handles at most {cap}; "
            f"use export mode (--export-lp) and an external MIQP solver"
        )


class QpSolverError(ScertError, RuntimeError):
    """The inner convex QP routine did not converge"""


class SupportSearchError(ScertError, RuntimeError):
    """The solve oracle failed while the greedy support search was running"""

    def __init__(self, position: int, kept: List[int], solve_count: int,
                 cause: Optional[BaseException] = None):
        self.position = position
        self.kept = list(kept)
        self.solve_count = solve_count
        self.cause = cause
        super().__init__(
            f"oracle failed while testing scenario {position} "
            f"(kept so far: {len(self.kept)}, solves: {solve_count}): {cause}"
        )
