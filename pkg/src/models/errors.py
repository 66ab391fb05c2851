"""
Exception hierarchy shared by every estimator, fitter and loader
"""

from typing import Any, Optional, Sequence


class RelGrowthError(Exception):
    """Base error; `code` is the stable machine-readable tag printed by the CLI"""
    code = "E_RELGROWTH"


class ConfigError(RelGrowthError):
    code = "E_CONFIG"


class ParseError(RelGrowthError):
    code = "E_PARSE"

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        self.row = row
        self.field = field
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationError(RelGrowthError, ValueError):
    code = "E_VALIDATION"

    def __init__(self, message: str, row: Optional[int] = None, field: Optional[str] = None):
        self.row = row
        self.field = field
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class InsufficientData(RelGrowthError):
    code = "E_INSUFFICIENT_DATA"


class DegenerateInput(RelGrowthError):
    code = "E_DEGENERATE"


class Unbounded(RelGrowthError):
    code = "E_UNBOUNDED"


class RankDeficient(RelGrowthError):
    code = "E_RANK_DEFICIENT"

    def __init__(self, message: str, dependent_columns: Sequence[str] = ()):
        self.dependent_columns = tuple(dependent_columns)
        super().__init__(message)


class DomainError(RelGrowthError, ValueError):
    code = "E_DOMAIN"


class NonPositiveHazard(RelGrowthError):
    code = "E_NONPOSITIVE_HAZARD"


class ExhaustedPopulation(RelGrowthError):
    code = "E_EXHAUSTED"


class CertainFailure(RelGrowthError):
    code = "E_CERTAIN_FAILURE"


class UnboundedIntensity(RelGrowthError):
    code = "E_UNBOUNDED_INTENSITY"


class OptInRequired(RelGrowthError):
    code = "E_OPT_IN"


class NonConvergence(RelGrowthError):
    """Restarts did not agree; `fit` holds the best (unconverged) result for diagnostics"""
    code = "E_NONCONVERGENCE"

    def __init__(self, message: str, fit: Any = None):
        self.fit = fit
        super().__init__(message)


class Unidentifiable(NonConvergence):
    code = "E_UNIDENTIFIABLE"
