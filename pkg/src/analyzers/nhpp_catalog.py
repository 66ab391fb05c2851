"""
Mean-value functions and intensities of the NHPP catalog

Each row carries its parameter domains, the closed-form m(t), the analytic
intensity (Zhang excepted), the finite asymptote when there is one, and the
starting point used by the fitter.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np
from scipy.special import expit, gammaln, logit

from ..models.errors import DomainError, ValidationError
from ..models.failure_data import FailureLog
from ..models.fit_models import NhppModelId, NhppParams
from ..utils.defaults import NhppDefaults

logger = logging.getLogger(__name__)

Values = Dict[str, float]
ArrayLike = Union[float, np.ndarray]


class Domain(str, Enum):
    POSITIVE = "positive"
    NONNEGATIVE = "nonnegative"
    UNIT = "unit"
    WEIGHT = "closed_unit"
    ABOVE_ONE = "above_one"
    REAL = "real"


@dataclass(frozen=True)
class ParamSpec:
    name: str
    domain: Domain = Domain.POSITIVE

    def check(self, value: float, model: NhppModelId) -> None:
        ok = {
            Domain.POSITIVE: value > 0,
            Domain.NONNEGATIVE: value >= 0,
            Domain.UNIT: 0 < value < 1,
            Domain.WEIGHT: 0 <= value <= 1,
            Domain.ABOVE_ONE: value > 1,
            Domain.REAL: True,
        }[self.domain]
        if not (ok and math.isfinite(value)):
            raise DomainError(f"{model.value}: parameter {self.name}={value} must be {self.domain.value}")

    def to_free(self, value: float) -> float:
        if self.domain in (Domain.POSITIVE, Domain.NONNEGATIVE):
            return math.log(max(value, 1e-300))
        if self.domain in (Domain.UNIT, Domain.WEIGHT):
            return float(logit(min(max(value, 1e-12), 1 - 1e-12)))
        if self.domain is Domain.ABOVE_ONE:
            return math.log(max(value - 1.0, 1e-300))
        return value

    def from_free(self, x: float) -> float:
        if self.domain in (Domain.POSITIVE, Domain.NONNEGATIVE):
            return math.exp(x)
        if self.domain in (Domain.UNIT, Domain.WEIGHT):
            return float(expit(x))
        if self.domain is Domain.ABOVE_ONE:
            return 1.0 + math.exp(x)
        return x


@dataclass(frozen=True)
class NhppRow:
    model: NhppModelId
    params: Tuple[ParamSpec, ...]
    mean: Callable[[Values, np.ndarray], np.ndarray]
    rate: Optional[Callable[[Values, np.ndarray], np.ndarray]]
    asymptote: Optional[Callable[[Values], float]]
    start: Callable[[int, float], Values]
    default_fittable: bool = True
    unbounded_at_zero: Callable[[Values], bool] = lambda p: False
    extra_check: Optional[Callable[[Values], None]] = None
    variant: str = ""

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(spec.name for spec in self.params)

    def validate(self, params: NhppParams) -> Values:
        values = params.values
        missing = [name for name in self.names if name not in values]
        if missing:
            raise ValidationError(f"{self.model.value} needs parameters {', '.join(missing)}", field=missing[0])
        for spec in self.params:
            spec.check(values[spec.name], self.model)
        if self.extra_check is not None:
            self.extra_check(values)
        return values


def _e(x):
    return np.exp(x)


def _start_finite(n: int, horizon: float) -> Values:
    return {"a": NhppDefaults.START_SCALE * n, "g": 1.0 / horizon}


# Gompertz

def _gompertz_power_mean(p, t):
    return p["a"] * np.power(p["g"], np.power(p["c"], t))


def _gompertz_power_rate(p, t):
    ct = np.power(p["c"], t)
    return p["a"] * np.power(p["g"], ct) * math.log(p["g"]) * ct * math.log(p["c"])


def _gompertz_linear_mean(p, t):
    return p["a"] * np.power(p["g"], p["c"] * t)


def _gompertz_linear_rate(p, t):
    return p["a"] * np.power(p["g"], p["c"] * t) * p["c"] * math.log(p["g"])


# Yamada family

def _yamada_mean(p, t):
    return p["a"] * -np.expm1(-p["r"] * p["c"] * -np.expm1(-p["g"] * t))


def _yamada_rate(p, t):
    x = _e(-p["g"] * t)
    rc = p["r"] * p["c"]
    return p["a"] * rc * p["g"] * x * _e(-rc * (1.0 - x))


def _rayleigh_mean(p, t):
    return p["a"] * -np.expm1(-p["r"] * p["c"] * -np.expm1(-0.5 * p["g"] * t * t))


def _rayleigh_rate(p, t):
    y = _e(-0.5 * p["g"] * t * t)
    rc = p["r"] * p["c"]
    return p["a"] * rc * p["g"] * t * y * _e(-rc * (1.0 - y))


def _yamada_asymptote(p):
    return p["a"] * -math.expm1(-p["r"] * p["c"])


# S-shaped with flex point; the parametrized row uses psi in place of c

def _flex_mean(shape_name):
    def mean(p, t):
        x = _e(-p["g"] * t)
        return p["a"] * (1.0 - x) / (1.0 + p[shape_name] * x)
    return mean


def _flex_rate(shape_name):
    def rate(p, t):
        x = _e(-p["g"] * t)
        s = p[shape_name]
        return p["a"] * p["g"] * x * (1.0 + s) / (1.0 + s * x) ** 2
    return rate


def _hyper_mean(p, t):
    b1 = p["b1"]
    return p["a"] * (1.0 - b1 * _e(-p["g1"] * t) - (1.0 - b1) * _e(-p["g2"] * t))


def _hyper_rate(p, t):
    b1 = p["b1"]
    return p["a"] * (b1 * p["g1"] * _e(-p["g1"] * t) + (1.0 - b1) * p["g2"] * _e(-p["g2"] * t))


def _parabolic_exponent(p, t):
    return p["l"] / 3.0 * t ** 3 + p["m"] / 2.0 * t * t + p["n"] * t


def _parabolic_check(p):
    if p["m"] < 0 and p["m"] ** 2 >= 4.0 * p["l"] * p["n"]:
        raise DomainError(f"parabolic: l t^2 + m t + n turns negative for m={p['m']}, l={p['l']}, n={p['n']}")


def _pham_rate(p, t):
    a, g, d = p["a"], p["g"], p["d"]
    return a * _e(-g * t) * (-d + g * (g - d) * t + g * g * d * t * t)


def _zhang_exponent(p) -> float:
    return p["c"] / p["g"] * (p["p"] - p["beta"])


def _zhang_mean(p, t):
    x = _e(-p["g"] * t)
    base = 1.0 - (1.0 + p["alpha"]) * x / (1.0 + p["alpha"] * x)
    with np.errstate(divide="ignore"):
        return p["a"] / (p["p"] - p["beta"]) * np.power(base, _zhang_exponent(p))


def _zhang_check(p):
    if p["p"] == p["beta"]:
        raise DomainError("zhang: p must differ from beta")
    if p["p"] < p["beta"] or p["alpha"] <= -1.0:
        warnings.warn(
            f"zhang: p={p['p']}, beta={p['beta']}, alpha={p['alpha']} lie outside the region where m(t) "
            "is an increasing count from 0",
            RuntimeWarning,
            stacklevel=4,
        )


_ROWS = [
    NhppRow(
        NhppModelId.DUANE, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] * np.power(t, p["g"]),
        rate=lambda p, t: p["a"] * p["g"] * np.power(t, p["g"] - 1.0),
        asymptote=None,
        start=lambda n, T: {"a": n / T, "g": 1.0},
        unbounded_at_zero=lambda p: p["g"] < 1.0,
    ),
    NhppRow(
        NhppModelId.GOMPERTZ, (ParamSpec("a"), ParamSpec("g", Domain.UNIT), ParamSpec("c", Domain.UNIT)),
        mean=_gompertz_power_mean, rate=_gompertz_power_rate,
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "g": 0.1, "c": math.exp(-3.0 / T)},
        default_fittable=False, variant="power",
    ),
    NhppRow(
        NhppModelId.GOMPERTZ, (ParamSpec("a"), ParamSpec("g", Domain.ABOVE_ONE), ParamSpec("c")),
        mean=_gompertz_linear_mean, rate=_gompertz_linear_rate,
        asymptote=None,
        start=lambda n, T: {"a": 1.0, "g": math.e, "c": math.log(max(n, 2)) / T},
        default_fittable=False, variant="linear",
    ),
    NhppRow(
        NhppModelId.GOEL_OKUMOTO, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] * -np.expm1(-p["g"] * t),
        rate=lambda p, t: p["a"] * p["g"] * _e(-p["g"] * t),
        asymptote=lambda p: p["a"],
        start=_start_finite,
    ),
    NhppRow(
        NhppModelId.SCHNEIDEWIND, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] / p["g"] * -np.expm1(-p["g"] * t),
        rate=lambda p, t: p["a"] * _e(-p["g"] * t),
        asymptote=lambda p: p["a"] / p["g"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n / T, "g": 1.0 / T},
    ),
    NhppRow(
        NhppModelId.WEIBULL, (ParamSpec("a"), ParamSpec("g"), ParamSpec("c")),
        mean=lambda p, t: p["a"] * -np.expm1(-p["g"] * np.power(t, p["c"])),
        rate=lambda p, t: p["a"] * p["g"] * p["c"] * np.power(t, p["c"] - 1.0) * _e(-p["g"] * np.power(t, p["c"])),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {**_start_finite(n, T), "c": 1.0},
        unbounded_at_zero=lambda p: p["c"] < 1.0,
    ),
    NhppRow(
        NhppModelId.YAMADA_EXPONENTIAL, (ParamSpec("a"), ParamSpec("g"), ParamSpec("r"), ParamSpec("c")),
        mean=_yamada_mean, rate=_yamada_rate,
        asymptote=_yamada_asymptote,
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n / -math.expm1(-1.0), "g": 1.0 / T, "r": 1.0, "c": 1.0},
        default_fittable=False,
    ),
    NhppRow(
        NhppModelId.RAYLEIGH_S, (ParamSpec("a"), ParamSpec("g"), ParamSpec("r"), ParamSpec("c")),
        mean=_rayleigh_mean, rate=_rayleigh_rate,
        asymptote=_yamada_asymptote,
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n / -math.expm1(-1.0), "g": 1.0 / T ** 2,
                            "r": 1.0, "c": 1.0},
    ),
    NhppRow(
        NhppModelId.DELAYED_S, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] * (1.0 - (1.0 + p["g"] * t) * _e(-p["g"] * t)),
        rate=lambda p, t: p["a"] * p["g"] ** 2 * t * _e(-p["g"] * t),
        asymptote=lambda p: p["a"],
        start=_start_finite,
    ),
    NhppRow(
        NhppModelId.INFLECTION_S, (ParamSpec("a"), ParamSpec("g"), ParamSpec("c", Domain.NONNEGATIVE)),
        mean=_flex_mean("c"), rate=_flex_rate("c"),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {**_start_finite(n, T), "c": 1.0},
    ),
    NhppRow(
        NhppModelId.PARAMETRIZED_S, (ParamSpec("a"), ParamSpec("g"), ParamSpec("psi", Domain.NONNEGATIVE)),
        mean=_flex_mean("psi"), rate=_flex_rate("psi"),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {**_start_finite(n, T), "psi": 1.0},
        default_fittable=False,
    ),
    NhppRow(
        NhppModelId.DAHIYA, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] * -np.expm1(-p["g"] * t) / (1.0 + _e(-p["g"] * t)),
        rate=lambda p, t: 2.0 * p["a"] * p["g"] * _e(-p["g"] * t) / (1.0 + _e(-p["g"] * t)) ** 2,
        asymptote=lambda p: p["a"],
        start=_start_finite,
    ),
    NhppRow(
        NhppModelId.PARETO, (ParamSpec("a"), ParamSpec("g", Domain.ABOVE_ONE), ParamSpec("c")),
        mean=lambda p, t: p["a"] * (1.0 - np.power(1.0 + t / p["c"], 1.0 - p["g"])),
        rate=lambda p, t: p["a"] * (p["g"] - 1.0) / p["c"] * np.power(1.0 + t / p["c"], -p["g"]),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "g": 2.0, "c": T},
    ),
    NhppRow(
        NhppModelId.HYPEREXPONENTIAL,
        (ParamSpec("a"), ParamSpec("b1", Domain.WEIGHT), ParamSpec("g1"), ParamSpec("g2")),
        mean=_hyper_mean, rate=_hyper_rate,
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "b1": 0.5, "g1": 2.0 / T, "g2": 0.5 / T},
        default_fittable=False,
    ),
    NhppRow(
        NhppModelId.LITTLEWOOD, (ParamSpec("a"), ParamSpec("g"), ParamSpec("c")),
        mean=lambda p, t: p["a"] * (1.0 - np.power(p["c"] / (p["c"] + t), p["g"])),
        rate=lambda p, t: p["a"] * p["g"] * p["c"] ** p["g"] * np.power(p["c"] + t, -p["g"] - 1.0),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "g": 1.0, "c": T},
        default_fittable=False,
    ),
    NhppRow(
        NhppModelId.PARABOLIC,
        (ParamSpec("a"), ParamSpec("l", Domain.NONNEGATIVE), ParamSpec("m", Domain.REAL),
         ParamSpec("n", Domain.NONNEGATIVE)),
        mean=lambda p, t: p["a"] * -np.expm1(-_parabolic_exponent(p, t)),
        rate=lambda p, t: p["a"] * (p["l"] * t * t + p["m"] * t + p["n"]) * _e(-_parabolic_exponent(p, t)),
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "l": 0.1 / T ** 3, "m": 0.0, "n": 1.0 / T},
        default_fittable=False,
        extra_check=_parabolic_check,
    ),
    NhppRow(
        NhppModelId.LOGISTIC, (ParamSpec("a"), ParamSpec("k"), ParamSpec("g")),
        mean=lambda p, t: p["a"] / (1.0 + p["k"] * _e(-p["g"] * t)),
        rate=lambda p, t: p["a"] * p["k"] * p["g"] * _e(-p["g"] * t) / (1.0 + p["k"] * _e(-p["g"] * t)) ** 2,
        asymptote=lambda p: p["a"],
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "k": float(max(n, 2)),
                            "g": 2.0 * math.log(max(n, 2)) / T},
    ),
    NhppRow(
        NhppModelId.PHAM, (ParamSpec("a"), ParamSpec("g"), ParamSpec("d", Domain.NONNEGATIVE)),
        mean=lambda p, t: p["a"] - p["a"] * _e(-p["g"] * t) * (1.0 + (p["g"] + p["d"]) * t + p["g"] * p["d"] * t * t),
        rate=_pham_rate,
        asymptote=lambda p: p["a"],
        start=lambda n, T: {**_start_finite(n, T), "d": 0.1 / T},
        default_fittable=False,
    ),
    NhppRow(
        NhppModelId.ZHANG,
        (ParamSpec("a"), ParamSpec("g"), ParamSpec("c"), ParamSpec("p", Domain.REAL),
         ParamSpec("beta", Domain.REAL), ParamSpec("alpha", Domain.REAL)),
        mean=_zhang_mean, rate=None,
        asymptote=lambda p: p["a"] / (p["p"] - p["beta"]),
        start=lambda n, T: {"a": NhppDefaults.START_SCALE * n, "g": 1.0 / T, "c": 1.0 / T,
                            "p": 1.0, "beta": 0.0, "alpha": 1.0},
        default_fittable=False,
        unbounded_at_zero=lambda p: _zhang_exponent(p) < 1.0,
        extra_check=_zhang_check,
    ),
    NhppRow(
        NhppModelId.XIE_LOG, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: p["a"] * np.power(np.log1p(t), p["g"]),
        rate=lambda p, t: p["a"] * p["g"] * np.power(np.log1p(t), p["g"] - 1.0) / (1.0 + t),
        asymptote=None,
        start=lambda n, T: {"a": n / math.log1p(T), "g": 1.0},
        unbounded_at_zero=lambda p: p["g"] < 1.0,
    ),
    NhppRow(
        NhppModelId.MUSA_OKUMOTO, (ParamSpec("a"), ParamSpec("g")),
        mean=lambda p, t: np.log1p(p["a"] * p["g"] * t) / p["a"],
        rate=lambda p, t: p["g"] / (p["a"] * p["g"] * t + 1.0),
        asymptote=None,
        start=lambda n, T: {"a": 1.0 / n, "g": (math.e - 1.0) * n / T},
    ),
]

CATALOG: Dict[Tuple[NhppModelId, str], NhppRow] = {(row.model, row.variant): row for row in _ROWS}
DEFAULT_VARIANTS = {NhppModelId.GOMPERTZ: "power"}
DEFAULT_FITTABLE = frozenset(row.model for row in _ROWS if row.default_fittable)


def get_row(model, variant: str = "") -> NhppRow:
    model = NhppModelId(model)
    variant = variant or DEFAULT_VARIANTS.get(model, "")
    try:
        return CATALOG[(model, variant)]
    except KeyError:
        raise ValidationError(f"{model.value} has no variant {variant!r}", field="variant") from None


def row_for(model, params: NhppParams) -> NhppRow:
    return get_row(model, params.variant)


def _as_times(t: ArrayLike) -> Tuple[np.ndarray, bool]:
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValidationError("times must be finite and nonnegative", field="t")
    return times, scalar


def _finite_difference(row: NhppRow, values: Values, t: np.ndarray) -> np.ndarray:
    """Richardson-extrapolated difference quotient, step halved until the relative change meets the target"""
    scale = np.maximum(t, 1.0 / values.get("g", 1.0))
    h = 1e-3 * scale
    central = t > 0
    h = np.where(central, np.minimum(h, 0.5 * t), h)

    def quotient(step):
        with np.errstate(divide="ignore", invalid="ignore"):
            forward = (row.mean(values, t + step) - row.mean(values, t)) / step
            symmetric = (row.mean(values, t + step) - row.mean(values, np.maximum(t - step, 0.0))) / (2.0 * step)
        return np.where(central, symmetric, forward)

    def richardson(step):
        order = np.where(central, 4.0, 2.0)
        coarse, fine = quotient(step), quotient(0.5 * step)
        return (order * fine - coarse) / (order - 1.0)

    estimate = richardson(h)
    for _ in range(30):
        h = 0.5 * h
        refined = richardson(h)
        done = np.abs(refined - estimate) <= NhppDefaults.FD_REL_TARGET * np.maximum(np.abs(refined), 1e-300)
        estimate = np.where(np.isfinite(refined), refined, estimate)
        if np.all(done):
            break
    return estimate


def mean_value(model, params: NhppParams, t: ArrayLike) -> ArrayLike:
    """m(t) of the catalog row"""
    row = row_for(model, params)
    values = row.validate(params)
    times, scalar = _as_times(t)
    result = np.asarray(row.mean(values, times), dtype=float)
    return float(result[0]) if scalar else result


def intensity(model, params: NhppParams, t: ArrayLike) -> ArrayLike:
    """lambda(t) = dm/dt, analytic for every row but Zhang"""
    row = row_for(model, params)
    values = row.validate(params)
    times, scalar = _as_times(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        if row.rate is None:
            result = _finite_difference(row, values, times)
        else:
            result = np.asarray(row.rate(values, times) * np.ones_like(times), dtype=float)
    return float(result[0]) if scalar else result


def asymptote(model, params: NhppParams) -> Optional[float]:
    """lim m(t) as t grows, or None for the infinite-failure rows"""
    row = row_for(model, params)
    values = row.validate(params)
    return None if row.asymptote is None else float(row.asymptote(values))


def unbounded_at_zero(model, params: NhppParams) -> bool:
    row = row_for(model, params)
    return bool(row.unbounded_at_zero(row.validate(params)))


def log_likelihood(model, params: NhppParams, log: FailureLog) -> float:
    """Event times: sum ln lambda(s_i) - (m(T) - m(0)); grouped: sum of Poisson log-pmfs of the bin counts

    Returns -inf, not an error, when an observed event or bin has zero (or negative) expected mass.
    """
    row = row_for(model, params)
    values = row.validate(params)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if log.is_grouped:
            m = np.asarray(row.mean(values, log.boundaries), dtype=float)
            delta = np.diff(m)
            counts = log.counts
            if np.any(delta < 0) or np.any((delta == 0) & (counts > 0)) or not np.all(np.isfinite(delta)):
                return -math.inf
            terms = np.where(counts > 0, counts * np.log(np.where(delta > 0, delta, 1.0)), 0.0)
            return float(np.sum(terms - delta - gammaln(counts + 1)))

        ends = np.asarray(row.mean(values, np.array([0.0, log.total_time])), dtype=float)
        compensator = ends[1] - ends[0]
        if not math.isfinite(compensator):
            return -math.inf
        times = log.event_times
        if times.size == 0:
            return -compensator
        rates = (_finite_difference(row, values, times) if row.rate is None
                 else np.asarray(row.rate(values, times) * np.ones_like(times), dtype=float))
        if np.any(~(rates > 0)) or not np.all(np.isfinite(rates)):
            return -math.inf
        return float(np.sum(np.log(rates)) - compensator)
