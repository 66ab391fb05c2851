"""
Model identifiers, parameter sets and fit results for the time-domain model families
"""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

from .errors import ValidationError
from .failure_data import LogKind


class HazardModelId(str, Enum):
    JM = "jm"
    LIPOV = "lipov"
    XUI = "xui"
    SHANTHIKUMAR = "shanthikumar"
    BUCCHIANICO = "bucchianico"
    SW = "sw"
    HYPERBOLIC = "hyperbolic"
    SUKERT = "sukert"
    MODIFIED_LIPOV = "modified-lipov"


MARKOV_MODELS = frozenset({
    HazardModelId.JM, HazardModelId.LIPOV, HazardModelId.XUI,
    HazardModelId.SHANTHIKUMAR, HazardModelId.BUCCHIANICO,
})
STAGE_MODELS = frozenset({HazardModelId.LIPOV, HazardModelId.SUKERT, HazardModelId.MODIFIED_LIPOV})


@dataclass(frozen=True)
class HazardParams:
    """N (continuous), phi, and the row-specific constants of the hazard catalog

    stage_counts / stage_durations carry the per-stage history N_j, d_j that the
    Lipov, Sukert and Modified Lipov rows are defined over.
    """
    n0: float
    phi: float
    k: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    c: Optional[float] = None
    stage_counts: Tuple[int, ...] = ()
    stage_durations: Tuple[float, ...] = ()
    variant: str = "standard"

    def __post_init__(self):
        if not (self.n0 > 0 and math.isfinite(self.n0)):
            raise ValidationError(f"must be positive, got {self.n0}", field="n0")
        if not (self.phi > 0 and math.isfinite(self.phi)):
            raise ValidationError(f"must be positive, got {self.phi}", field="phi")
        object.__setattr__(self, "stage_counts", tuple(int(n) for n in self.stage_counts))
        object.__setattr__(self, "stage_durations", tuple(float(d) for d in self.stage_durations))

    def with_values(self, **changes) -> "HazardParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["stage_counts"] = list(self.stage_counts)
        data["stage_durations"] = list(self.stage_durations)
        return {key: value for key, value in data.items() if value is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "HazardParams":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{key: value for key, value in data.items() if key in known})


@dataclass(frozen=True)
class GrowthFit:
    model: HazardModelId
    params: HazardParams
    log_lik: float
    converged: bool
    iterations: int
    observed: int
    n_fitted: int
    integer_n0: Optional[int] = None
    integer_log_lik: Optional[float] = None
    restarts_agreeing: int = 0
    restarts_run: int = 0

    @property
    def family(self) -> str:
        return "growth"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "model": self.model.value,
            "params": self.params.to_dict(),
            "log_lik": self.log_lik,
            "converged": self.converged,
            "iterations": self.iterations,
            "observed": self.observed,
            "n_fitted": self.n_fitted,
            "integer_n0": self.integer_n0,
            "integer_log_lik": self.integer_log_lik,
            "restarts_agreeing": self.restarts_agreeing,
            "restarts_run": self.restarts_run,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GrowthFit":
        return cls(
            model=HazardModelId(data["model"]),
            params=HazardParams.from_dict(data["params"]),
            log_lik=float(data["log_lik"]),
            converged=bool(data["converged"]),
            iterations=int(data.get("iterations", 0)),
            observed=int(data["observed"]),
            n_fitted=int(data.get("n_fitted", 2)),
            integer_n0=data.get("integer_n0"),
            integer_log_lik=data.get("integer_log_lik"),
            restarts_agreeing=int(data.get("restarts_agreeing", 0)),
            restarts_run=int(data.get("restarts_run", 0)),
        )


class NhppModelId(str, Enum):
    DUANE = "duane"
    GOMPERTZ = "gompertz"
    GOEL_OKUMOTO = "goel-okumoto"
    SCHNEIDEWIND = "schneidewind"
    WEIBULL = "weibull"
    YAMADA_EXPONENTIAL = "yamada-exponential"
    RAYLEIGH_S = "rayleigh-s"
    DELAYED_S = "delayed-s"
    INFLECTION_S = "inflection-s"
    PARAMETRIZED_S = "parametrized-s"
    DAHIYA = "dahiya"
    PARETO = "pareto"
    HYPEREXPONENTIAL = "hyperexponential"
    LITTLEWOOD = "littlewood"
    PARABOLIC = "parabolic"
    LOGISTIC = "logistic"
    PHAM = "pham"
    ZHANG = "zhang"
    XIE_LOG = "xie-log"
    MUSA_OKUMOTO = "musa-okumoto"


@dataclass(frozen=True)
class NhppParams:
    """Named parameter vector of one catalog row; `variant` selects an alternative reading of the row"""
    values: Dict[str, float]
    variant: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", {str(k): float(v) for k, v in self.values.items()})

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def with_values(self, **changes) -> "NhppParams":
        return NhppParams({**self.values, **changes}, self.variant)

    def to_dict(self) -> dict:
        data = {"values": dict(self.values)}
        if self.variant:
            data["variant"] = self.variant
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "NhppParams":
        return cls(values=data["values"], variant=data.get("variant", ""))


@dataclass(frozen=True)
class NhppFit:
    model: NhppModelId
    params: NhppParams
    log_lik: float
    fitted_on: LogKind
    converged: bool
    iterations: int
    n_fitted: int
    horizon: float
    observed: int
    restarts_agreeing: int = 0
    restarts_run: int = 0

    @property
    def family(self) -> str:
        return "nhpp"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "model": self.model.value,
            "params": self.params.to_dict(),
            "log_lik": self.log_lik,
            "fitted_on": self.fitted_on.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "n_fitted": self.n_fitted,
            "horizon": self.horizon,
            "observed": self.observed,
            "restarts_agreeing": self.restarts_agreeing,
            "restarts_run": self.restarts_run,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NhppFit":
        return cls(
            model=NhppModelId(data["model"]),
            params=NhppParams.from_dict(data["params"]),
            log_lik=float(data["log_lik"]),
            fitted_on=LogKind(data["fitted_on"]),
            converged=bool(data["converged"]),
            iterations=int(data.get("iterations", 0)),
            n_fitted=int(data["n_fitted"]),
            horizon=float(data["horizon"]),
            observed=int(data["observed"]),
            restarts_agreeing=int(data.get("restarts_agreeing", 0)),
            restarts_run=int(data.get("restarts_run", 0)),
        )


def restart_warning(fit) -> Optional[str]:
    """Set when some restarts ended away from the best log-likelihood, even if enough agreed to converge"""
    if fit.restarts_run and fit.restarts_agreeing < fit.restarts_run:
        return (f"{fit.model.value}: {fit.restarts_run - fit.restarts_agreeing} of {fit.restarts_run} "
                f"restarts disagree with the best log-likelihood {fit.log_lik:.6g}")
    return None


@dataclass(frozen=True)
class NhppPrediction:
    expected_new: float
    p_no_failure: float
    remaining: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ModelScore:
    model: str
    log_lik: float
    n_params: int
    n_obs: int
    aic: float
    bic: float
    one_step_sse: Optional[float] = None
    ic: Optional[float] = None
    params: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PrequentialResult:
    sse: float
    windows: Tuple[int, ...]
    skipped: Tuple[Tuple[int, str], ...] = ()
    squared_errors: Tuple[float, ...] = ()

    @property
    def skipped_windows(self) -> List[int]:
        return [index for index, _ in self.skipped]
