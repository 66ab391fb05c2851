"""
NHPP maximum-likelihood fitting, Poisson predictions and fitted-curve export
"""

import csv
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.stats import poisson

from ..models.errors import InsufficientData, NonConvergence, OptInRequired, Unidentifiable, ValidationError
from ..models.failure_data import FailureLog
from ..models.fit_models import NhppFit, NhppModelId, NhppParams, NhppPrediction
from ..utils.config import Config
from ..utils.defaults import FitDefaults, NhppDefaults
from ..utils.optimizer import minimize_multistart
from .nhpp_catalog import asymptote, get_row, intensity, log_likelihood, mean_value

logger = logging.getLogger(__name__)

CURVE_HEADER = ["t", "m_fitted", "lambda_fitted", "cumulative_observed"]


def _require_data(log: FailureLog, model: NhppModelId) -> None:
    if log.is_grouped:
        nonempty = int(np.count_nonzero(log.counts))
        if nonempty < NhppDefaults.MIN_NONEMPTY_BINS:
            raise InsufficientData(
                f"{model.value} fit needs at least {NhppDefaults.MIN_NONEMPTY_BINS} nonempty bins, got {nonempty}"
            )
    else:
        log.require_events(NhppDefaults.MIN_EVENTS, f"{model.value} fit")


class NhppAnalyzer:
    """Seeded multi-restart MLE in the unconstrained parameter space of each catalog row"""

    def __init__(self, restarts: int = FitDefaults.RESTARTS):
        self.restarts = restarts

    def fit(
        self,
        model,
        log: FailureLog,
        seed: Optional[int] = None,
        start: Optional[Dict[str, float]] = None,
        variant: str = "",
    ) -> NhppFit:
        model = NhppModelId(model)
        row = get_row(model, variant)
        seed = Config.get_default_seed() if seed is None else seed
        if not row.default_fittable and start is None:
            raise OptInRequired(
                f"{model.value} is evaluate-only by default: opt-in model requires starting point"
            )
        _require_data(log, model)

        guess = row.start(max(log.n_events, 1), log.total_time)
        if start:
            unknown = set(start) - set(row.names)
            if unknown:
                raise ValidationError(f"{model.value} has no parameters {', '.join(sorted(unknown))}", field="start")
            guess.update({name: float(value) for name, value in start.items()})
        row.validate(NhppParams(guess, row.variant))
        specs = row.params

        def unpack(x: Sequence[float]) -> NhppParams:
            return NhppParams({spec.name: spec.from_free(v) for spec, v in zip(specs, x)}, row.variant)

        def objective(x: np.ndarray) -> float:
            return -log_likelihood(model, unpack(x), log)

        x0 = [spec.to_free(guess[spec.name]) for spec in specs]
        tolerance = FitDefaults.AGREEMENT_TOL if row.default_fittable else FitDefaults.OPT_IN_AGREEMENT_TOL
        logger.info("fitting %s on %s log with %d events (seed %d)", model.value, log.kind.value, log.n_events, seed)
        result = minimize_multistart(objective, x0, seed=seed, restarts=self.restarts, agreement_tol=tolerance)

        log_lik = -result.fun if result.finite else -math.inf
        fit = NhppFit(
            model=model,
            params=unpack(result.x),
            log_lik=log_lik,
            fitted_on=log.kind,
            converged=result.converged(FitDefaults.MIN_AGREEING) and math.isfinite(log_lik),
            iterations=result.iterations,
            n_fitted=len(specs),
            horizon=log.total_time,
            observed=log.n_events,
            restarts_agreeing=result.agreeing,
            restarts_run=len(result.restarts),
        )
        if not fit.converged:
            message = (f"{model.value}: only {result.agreeing} of {len(result.restarts)} restarts reached the best "
                       f"log-likelihood {log_lik:.6g} within {tolerance:g}")
            if row.default_fittable:
                raise NonConvergence(message, fit=fit)
            raise Unidentifiable(message + "; the parameters are not identifiable from this log", fit=fit)
        logger.info("%s: %s log_lik=%.6g", model.value,
                    ", ".join(f"{k}={v:.6g}" for k, v in fit.params.values.items()), log_lik)
        return fit


def fit(model, log: FailureLog, seed: Optional[int] = None, start: Optional[Dict[str, float]] = None,
        variant: str = "") -> NhppFit:
    return NhppAnalyzer().fit(model, log, seed=seed, start=start, variant=variant)


def predict(fit: NhppFit, horizon: float, at: Optional[float] = None) -> NhppPrediction:
    """Expected errors in (T, T + horizon], the no-failure probability, and the remaining count if finite"""
    at = fit.horizon if at is None else float(at)
    if horizon < 0:
        raise ValidationError(f"must be nonnegative, got {horizon}", field="horizon")
    if at < fit.horizon:
        raise ValidationError(f"prediction origin {at} precedes the last observation {fit.horizon}", field="at")
    m_now, m_later = mean_value(fit.model, fit.params, np.array([at, at + horizon]))
    expected_new = max(0.0, float(m_later - m_now))
    limit = asymptote(fit.model, fit.params)
    return NhppPrediction(
        expected_new=expected_new,
        p_no_failure=math.exp(-expected_new),
        remaining=None if limit is None else max(0.0, limit - float(m_now)),
    )


def failure_count_probability(fit: NhppFit, k: int, horizon: float, at: Optional[float] = None) -> float:
    """P(exactly k errors identified in (T, T + horizon])"""
    if k < 0:
        raise ValidationError(f"must be nonnegative, got {k}", field="k")
    expected = predict(fit, horizon, at).expected_new
    return float(poisson.pmf(k, expected))


def time_to_next_expected(fit: NhppFit, after: float) -> Optional[float]:
    """The time s > after with m(s) = m(after) + 1, or None when the curve never gains one more error"""
    target = mean_value(fit.model, fit.params, after) + 1.0
    limit = asymptote(fit.model, fit.params)
    if limit is not None and limit <= target:
        return None
    gap = max(after, 1.0)
    upper = after + gap
    for _ in range(200):
        if mean_value(fit.model, fit.params, upper) >= target:
            break
        gap *= 2.0
        upper = after + gap
    else:
        return None
    return float(brentq(lambda s: mean_value(fit.model, fit.params, s) - target, after, upper, xtol=1e-12))


@dataclass(frozen=True)
class CurvePoint:
    t: float
    m_fitted: float
    lambda_fitted: float
    cumulative_observed: int


def _observed_counts(log: FailureLog, grid: np.ndarray) -> np.ndarray:
    if log.is_grouped:
        closed = np.searchsorted(log.boundaries, grid, side="right") - 1
        cumulative = np.concatenate([[0], np.cumsum(log.counts)])
        return cumulative[np.clip(closed, 0, len(cumulative) - 1)]
    return np.searchsorted(log.event_times, grid, side="right")


def fitted_curve(fit: NhppFit, log: FailureLog, grid: Union[int, Sequence[float]] = 50) -> List[CurvePoint]:
    """m, lambda and the observed cumulative count on a grid; an int means that many points over [0, T]"""
    if isinstance(grid, (int, np.integer)):
        if grid < 2:
            raise ValidationError(f"need at least 2 grid points, got {grid}", field="grid")
        points = np.linspace(0.0, log.total_time, int(grid))
    else:
        points = np.asarray(grid, dtype=float)
    m = np.atleast_1d(mean_value(fit.model, fit.params, points))
    lam = np.atleast_1d(intensity(fit.model, fit.params, points))
    observed = _observed_counts(log, points)
    return [CurvePoint(float(t), float(mt), float(lt), int(c)) for t, mt, lt, c in zip(points, m, lam, observed)]


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for p in points:
            writer.writerow([repr(p.t), repr(p.m_fitted), repr(p.lambda_fitted), p.cumulative_observed])
    logger.debug("wrote %d curve points to %s", len(points), path)
