"""
Data models for closed-form estimators: seeding, code metrics and run-domain reliability
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from .errors import ValidationError


class EstimateMethod(str, Enum):
    MILLS = "mills"
    PARTITION = "partition"
    FUNCTIONAL_OBJECTS = "functional_objects"
    GROUPS = "groups"


@dataclass(frozen=True)
class PopulationEstimate:
    n_hat: float
    method: EstimateMethod
    observed: int
    auxiliary: Dict[str, float] = field(default_factory=dict)

    @property
    def n_rounded(self) -> int:
        return int(round(self.n_hat))

    @property
    def remaining(self) -> float:
        return max(0.0, self.n_hat - self.observed)

    def to_dict(self) -> dict:
        return {
            "method": self.method.value,
            "n_hat": self.n_hat,
            "n_rounded": self.n_rounded,
            "observed": self.observed,
            "remaining": self.remaining,
            "auxiliary": dict(self.auxiliary),
        }


@dataclass(frozen=True)
class HalsteadCounts:
    eta1: int
    eta2: int
    n1: int
    n2: int

    def __post_init__(self):
        for name in ("eta1", "eta2", "n1", "n2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ValidationError(f"must be a positive integer, got {value!r}", field=name)
        if self.n1 < self.eta1:
            raise ValidationError("operator uses cannot be fewer than distinct operators", field="n1")
        if self.n2 < self.eta2:
            raise ValidationError("operand uses cannot be fewer than distinct operands", field="n2")


@dataclass(frozen=True)
class HalsteadReport:
    vocabulary: int
    length: int
    theoretical_length: float
    volume: float
    level: float
    effort: float
    predicted_defects: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


TRW_FACTOR_NAMES = ("l_tot", "c_inf", "c_c", "c_io", "u_read")


@dataclass(frozen=True)
class TrwFactors:
    """Logical, interlink, calculation, input-output and readability complexity of a unit"""
    logical: float
    interlink: float
    calc: float
    io: float
    readability: float

    def __post_init__(self):
        for name, value in zip(TRW_FACTOR_NAMES, self.as_array()):
            if not math.isfinite(value):
                raise ValidationError(f"must be finite, got {value}", field=name)

    def as_array(self) -> np.ndarray:
        return np.array([self.logical, self.interlink, self.calc, self.io, self.readability], dtype=float)


@dataclass(frozen=True)
class TrwModel:
    kappas: Tuple[float, float, float, float, float]
    residual_sse: float
    r_squared: float = float("nan")
    n_samples: int = 0

    def __post_init__(self):
        kappas = tuple(float(k) for k in self.kappas)
        if len(kappas) != 5 or not all(math.isfinite(k) for k in kappas):
            raise ValidationError("needs five finite coefficients", field="kappas")
        object.__setattr__(self, "kappas", kappas)

    def to_dict(self) -> dict:
        return {
            "kappas": list(self.kappas),
            "residual_sse": self.residual_sse,
            "r_squared": self.r_squared,
            "n_samples": self.n_samples,
        }


@dataclass(frozen=True)
class NelsonEstimate:
    reliability: float
    per_domain_failure_rates: Tuple[float, ...]

    def to_dict(self) -> dict:
        return {"reliability": self.reliability, "per_domain_failure_rates": list(self.per_domain_failure_rates)}


@dataclass(frozen=True)
class TimeDomainSeries:
    """Run outcomes recast as a piecewise-constant hazard over cumulative run time"""
    hazards: Tuple[float, ...]
    cumulative_times: Tuple[float, ...]
    durations: Tuple[float, ...]

    @property
    def survival(self) -> float:
        return math.exp(-math.fsum(h * dt for h, dt in zip(self.hazards, self.durations)))


@dataclass(frozen=True)
class UpgradeModel:
    p0: float
    p_inf: float
    a1: float
    a2: float
    fitted_log_lik: float = float("nan")
    converged: bool = True

    def __post_init__(self):
        if not (0.0 <= self.p0 <= self.p_inf <= 1.0):
            raise ValidationError(f"requires 0 <= p0 <= p_inf <= 1, got p0={self.p0}, p_inf={self.p_inf}", field="p0")
        if self.a1 < 0 or self.a2 < 0:
            raise ValidationError("efficiency factors must be nonnegative", field="a1" if self.a1 < 0 else "a2")

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class UpgradeTrajectory:
    reliabilities: Tuple[float, ...]
    increments: Tuple[float, ...]
