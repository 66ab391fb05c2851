"""
Hazard catalog of the finite-failure Markov and semi-Markov growth models

Every row factors as  lambda_i(t) = state_i * shape_i(t), where state_i depends
on the error (or stage) index and the parameters, and shape_i is the dwell-time
profile (1 for the Markov rows). The cumulative hazard integrates shape_i
analytically.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
from scipy.special import gammaln

from ..models.errors import DomainError, NonPositiveHazard, ValidationError
from ..models.failure_data import FailureLog
from ..models.fit_models import MARKOV_MODELS, STAGE_MODELS, HazardModelId, HazardParams

ArrayFn = Callable[[HazardParams, np.ndarray], np.ndarray]
ShapeFn = Callable[[HazardParams, np.ndarray, np.ndarray], np.ndarray]


def _prefix(values, index: np.ndarray) -> np.ndarray:
    """values[0] + ... + values[index-1], with index clipped to the recorded stages"""
    cumulative = np.concatenate([[0.0], np.cumsum(np.asarray(values, dtype=float))])
    return cumulative[np.clip(index, 0, len(cumulative) - 1)]


def _sequential_remaining(p: HazardParams, i: np.ndarray) -> np.ndarray:
    return p.n0 - (i - 1)


def _stage_remaining(p: HazardParams, i: np.ndarray) -> np.ndarray:
    return p.n0 - _prefix(p.stage_counts, i - 1)


def _sukert_remaining(p: HazardParams, i: np.ndarray) -> np.ndarray:
    # N - (i - N_i), N_i read as the cumulative count through stage i
    return p.n0 - (i - _prefix(p.stage_counts, i))


def _linear_state(p: HazardParams, remaining: np.ndarray) -> np.ndarray:
    return p.phi * remaining


def _xui_state(p: HazardParams, remaining: np.ndarray) -> np.ndarray:
    sign = 1.0 if p.variant == "positive" else -1.0
    return p.phi * np.expm1(sign * p.k * remaining)


def _shanthikumar_state(p: HazardParams, remaining: np.ndarray) -> np.ndarray:
    return p.phi * np.power(remaining, p.k)


def _bucchianico_state(p: HazardParams, remaining: np.ndarray) -> np.ndarray:
    if not (0.0 < p.phi < 1.0):
        raise DomainError(f"Bucchianico row needs phi in (0, 1), got {p.phi}")
    return -np.expm1(remaining * math.log(p.phi))


def _constant_shape(p, i, t):
    return np.ones_like(t)


def _constant_cumulative(p, i, t):
    return t


def _linear_shape(p, i, t):
    return t


def _linear_cumulative(p, i, t):
    return 0.5 * t * t


def _hyperbolic_shape(p, i, t):
    return -p.a * t * t + p.b * t + p.c


def _hyperbolic_cumulative(p, i, t):
    return -p.a * t ** 3 / 3.0 + p.b * t * t / 2.0 + p.c * t


def _modified_lipov_shape(p, i, t):
    return 0.5 * t + _prefix(p.stage_durations, i - 1)


def _modified_lipov_cumulative(p, i, t):
    return 0.25 * t * t + _prefix(p.stage_durations, i - 1) * t


@dataclass(frozen=True)
class HazardRow:
    model: HazardModelId
    remaining: ArrayFn
    state: Callable[[HazardParams, np.ndarray], np.ndarray]
    shape: ShapeFn
    cumulative_shape: ShapeFn
    required: Tuple[str, ...] = ()

    @property
    def markov(self) -> bool:
        return self.model in MARKOV_MODELS

    @property
    def stage_based(self) -> bool:
        return self.model in STAGE_MODELS

    def check(self, params: HazardParams) -> None:
        missing = [name for name in self.required if getattr(params, name) is None]
        if missing:
            raise ValidationError(f"{self.model.value} needs {', '.join(missing)}", field=missing[0])


CATALOG: Dict[HazardModelId, HazardRow] = {
    HazardModelId.JM: HazardRow(
        HazardModelId.JM, _sequential_remaining, _linear_state, _constant_shape, _constant_cumulative),
    HazardModelId.LIPOV: HazardRow(
        HazardModelId.LIPOV, _stage_remaining, _linear_state, _constant_shape, _constant_cumulative),
    HazardModelId.XUI: HazardRow(
        HazardModelId.XUI, _sequential_remaining, _xui_state, _constant_shape, _constant_cumulative, ("k",)),
    HazardModelId.SHANTHIKUMAR: HazardRow(
        HazardModelId.SHANTHIKUMAR, _sequential_remaining, _shanthikumar_state,
        _constant_shape, _constant_cumulative, ("k",)),
    HazardModelId.BUCCHIANICO: HazardRow(
        HazardModelId.BUCCHIANICO, _sequential_remaining, _bucchianico_state, _constant_shape, _constant_cumulative),
    HazardModelId.SW: HazardRow(
        HazardModelId.SW, _sequential_remaining, _linear_state, _linear_shape, _linear_cumulative),
    HazardModelId.HYPERBOLIC: HazardRow(
        HazardModelId.HYPERBOLIC, _sequential_remaining, _linear_state,
        _hyperbolic_shape, _hyperbolic_cumulative, ("a", "b", "c")),
    HazardModelId.SUKERT: HazardRow(
        HazardModelId.SUKERT, _sukert_remaining, _linear_state, _linear_shape, _linear_cumulative),
    HazardModelId.MODIFIED_LIPOV: HazardRow(
        HazardModelId.MODIFIED_LIPOV, _stage_remaining, _linear_state,
        _modified_lipov_shape, _modified_lipov_cumulative),
}


def get_row(model) -> HazardRow:
    return CATALOG[HazardModelId(model)]


def remaining_errors(model, params: HazardParams, i: int) -> float:
    row = get_row(model)
    return float(row.remaining(params, np.asarray(i)))


def _check_args(row: HazardRow, params: HazardParams, i: int, t: float) -> None:
    row.check(params)
    if i < 1:
        raise ValidationError(f"error index must be at least 1, got {i}", field="i")
    if not row.markov and not t > 0:
        raise ValidationError(f"semi-Markov rows need a positive dwell time, got {t}", field="t")
    if t < 0:
        raise ValidationError(f"dwell time must be nonnegative, got {t}", field="t")


def hazard(model, params: HazardParams, i: int, t: float = 0.0) -> float:
    """lambda_i at dwell time t, exactly as the catalog row defines it; 0 once the population is exhausted"""
    row = get_row(model)
    _check_args(row, params, i, t)
    index = np.asarray(i)
    remaining = row.remaining(params, index)
    if remaining <= 0:
        return 0.0
    value = float(row.state(params, remaining) * row.shape(params, index, np.asarray(float(t))))
    if not value > 0:
        raise NonPositiveHazard(
            f"{row.model.value} hazard is {value:.6g} at i={i}, t={t}; parameters lie outside the valid region"
            + (" (the standard Xui row is negative for k > 0; see variant='positive')"
               if row.model is HazardModelId.XUI and params.variant != "positive" else "")
        )
    return value


def cumulative_hazard(model, params: HazardParams, i: int, t: float) -> float:
    """Integral of lambda_i over dwell time [0, t]"""
    row = get_row(model)
    row.check(params)
    index = np.asarray(i)
    remaining = row.remaining(params, index)
    if remaining <= 0:
        return 0.0
    return float(row.state(params, remaining) * row.cumulative_shape(params, index, np.asarray(float(t))))


def density(model, params: HazardParams, i: int, t: float) -> float:
    """Density of the i-th dwell time: lambda_i(t) exp(-Lambda_i(t))"""
    row = get_row(model)
    if row.markov or t > 0:
        return hazard(model, params, i, t) * math.exp(-cumulative_hazard(model, params, i, t))
    row.check(params)
    index = np.asarray(i)
    remaining = row.remaining(params, index)
    if remaining <= 0:
        return 0.0
    return max(0.0, float(row.state(params, remaining) * row.shape(params, index, np.asarray(0.0))))


def density_jm(params: HazardParams, i: int, t: float) -> float:
    """p(t_i) = lambda_i exp(-lambda_i t_i)"""
    rate = hazard(HazardModelId.JM, params, i)
    return rate * math.exp(-rate * t)


def density_sw(params: HazardParams, i: int, t: float) -> float:
    """Rayleigh density r t exp(-r t^2 / 2) with r = phi (N - (i - 1))"""
    remaining = params.n0 - (i - 1)
    if remaining <= 0:
        return 0.0
    rate = params.phi * remaining
    return rate * t * math.exp(-0.5 * rate * t * t)


def log_likelihood(model, params: HazardParams, log: FailureLog) -> float:
    """Sum of log dwell-time densities (event rows) or Poisson stage-count log-pmfs (stage rows)"""
    row = get_row(model)
    row.check(params)
    if row.stage_based:
        if not log.is_grouped:
            raise ValidationError(f"{row.model.value} is defined over stages and needs a grouped log", field="kind")
        index = np.arange(1, len(log.bins) + 1)
        params = params.with_values(stage_counts=tuple(int(c) for c in log.counts),
                                    stage_durations=tuple(log.durations))
        expected = row.state(params, row.remaining(params, index)) * row.cumulative_shape(params, index, log.durations)
        counts = log.counts
        if np.any((expected <= 0) & (counts > 0)) or np.any(expected < 0):
            return -math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(counts > 0, counts * np.log(expected), 0.0) - expected - gammaln(counts + 1)
        return float(np.sum(terms))

    if log.is_grouped:
        raise ValidationError(f"{row.model.value} is defined over inter-failure times and needs an event-times log",
                              field="kind")
    index = np.arange(1, len(log.intervals) + 1)
    t = log.interval_array
    remaining = row.remaining(params, index)
    if np.any(remaining <= 0):
        return -math.inf
    state = row.state(params, remaining)
    rates = state * row.shape(params, index, t)
    if np.any(~(rates > 0)):
        return -math.inf
    return float(np.sum(np.log(rates) - state * row.cumulative_shape(params, index, t)))
