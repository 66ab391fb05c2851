"""
Maximum-likelihood fitting and prediction for the Markov and semi-Markov growth models
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, logit

from ..models.errors import ExhaustedPopulation, NonConvergence, NonPositiveHazard, ValidationError
from ..models.failure_data import FailureLog
from ..models.fit_models import GrowthFit, HazardModelId, HazardParams
from ..utils.config import Config
from ..utils.defaults import FitDefaults, GrowthDefaults
from ..utils.optimizer import minimize_multistart
from ..utils.rng import derive_seed
from .hazard_catalog import HazardRow, cumulative_hazard, get_row, hazard, log_likelihood

logger = logging.getLogger(__name__)

EXTRA_NAMES = ("k", "a", "b", "c")


def _extra_start(model: HazardModelId, name: str, variant: str) -> float:
    if name == "k":
        if model is HazardModelId.XUI:
            # standard row is positive only for k < 0
            return 0.01 if variant == "positive" else -0.01
        return 1.0
    return 1.0 if name == "c" else 0.0


def _stage_history(row: HazardRow, log: FailureLog) -> dict:
    if not row.stage_based:
        return {}
    return {"stage_counts": tuple(int(c) for c in log.counts), "stage_durations": tuple(log.durations)}


def expected_total(row: HazardRow, params: HazardParams, log: FailureLog) -> float:
    """Summed cumulative hazard over the log: dwell times for event rows, stages for stage rows"""
    if row.stage_based:
        index = np.arange(1, len(log.bins) + 1)
        t = log.durations
    else:
        index = np.arange(1, len(log.intervals) + 1)
        t = log.interval_array
    remaining = row.remaining(params, index)
    return float(np.sum(row.state(params, remaining) * row.cumulative_shape(params, index, t)))


def closed_form_phi(model, params: HazardParams, log: FailureLog) -> float:
    """phi-hat at fixed N and constants, for every row linear in phi: n / sum(Lambda_i at phi = 1)

    For JM this is n / sum (N - i + 1) t_i.
    """
    row = get_row(model)
    if row.model is HazardModelId.BUCCHIANICO:
        raise ValidationError("Bucchianico hazard is not linear in phi", field="model")
    total = expected_total(row, params.with_values(phi=1.0), log)
    if not total > 0:
        return math.nan
    return log.n_events / total


class GrowthAnalyzer:
    """Multi-restart MLE over (n0, phi[, constants]) followed by an integer scan of n0"""

    def __init__(
        self,
        restarts: int = FitDefaults.RESTARTS,
        agreement_tol: float = FitDefaults.AGREEMENT_TOL,
        scan_radius: int = FitDefaults.INTEGER_SCAN_RADIUS,
    ):
        self.restarts = restarts
        self.agreement_tol = agreement_tol
        self.scan_radius = scan_radius

    def fit(
        self,
        model,
        log: FailureLog,
        seed: Optional[int] = None,
        extras: Optional[Dict[str, float]] = None,
        fit_extras: bool = False,
        variant: str = "standard",
    ) -> GrowthFit:
        model = HazardModelId(model)
        row = get_row(model)
        seed = Config.get_default_seed() if seed is None else seed
        extras = {name: float(value) for name, value in (extras or {}).items() if value is not None}
        unknown = set(extras) - set(EXTRA_NAMES)
        if unknown:
            raise ValidationError(f"unknown model constants: {', '.join(sorted(unknown))}", field="extras")
        self._check_log(row, log)
        observed = log.n_events

        if model is HazardModelId.HYPERBOLIC:
            if fit_extras:
                free_extras = ["a", "b", "c"]
            else:
                missing = [name for name in row.required if name not in extras]
                if missing:
                    raise ValidationError(
                        f"hyperbolic constants {', '.join(missing)} must be supplied (or fitted with fit_extras)",
                        field=missing[0],
                    )
                free_extras = []
        else:
            free_extras = [name for name in row.required if name not in extras]

        constants = {name: extras.get(name, _extra_start(model, name, variant)) for name in row.required}
        base = HazardParams(
            n0=observed + 1.0, phi=1.0, variant=variant, **constants, **_stage_history(row, log)
        )

        def unpack(x: Sequence[float], n0: Optional[float] = None) -> HazardParams:
            offset = 0
            if n0 is None:
                n0 = observed + math.exp(x[0])
                offset = 1
            phi = float(expit(x[offset])) if model is HazardModelId.BUCCHIANICO else math.exp(x[offset])
            fitted = {name: float(x[offset + 1 + j]) for j, name in enumerate(free_extras)}
            return base.with_values(n0=n0, phi=phi, **fitted)

        def objective(x: np.ndarray, n0: Optional[float] = None) -> float:
            return -log_likelihood(model, unpack(x, n0), log)

        x0 = self._start(row, base, log, observed, free_extras)
        logger.info("fitting %s on %d errors (seed %d)", model.value, observed, seed)
        result = minimize_multistart(
            objective, x0, seed=seed, restarts=self.restarts, agreement_tol=self.agreement_tol
        )
        params = unpack(result.x)
        log_lik = -result.fun if result.finite else -math.inf

        integer_n0, integer_log_lik, integer_params = self._integer_scan(
            model, params, log, observed, seed, objective, free_extras, unpack
        )
        if integer_params is not None and integer_log_lik > log_lik:
            logger.debug("integer n0=%d beats the continuous optimum (%.10g > %.10g)",
                         integer_n0, integer_log_lik, log_lik)
            params, log_lik = integer_params, integer_log_lik

        fit = GrowthFit(
            model=model,
            params=params,
            log_lik=log_lik,
            converged=result.converged(FitDefaults.MIN_AGREEING) and math.isfinite(log_lik),
            iterations=result.iterations,
            observed=observed,
            n_fitted=2 + len(free_extras),
            integer_n0=integer_n0,
            integer_log_lik=integer_log_lik,
            restarts_agreeing=result.agreeing,
            restarts_run=len(result.restarts),
        )
        if not fit.converged:
            raise NonConvergence(
                f"{model.value}: only {result.agreeing} of {len(result.restarts)} restarts reached the best "
                f"log-likelihood {log_lik:.6g} within {self.agreement_tol:g}",
                fit=fit,
            )
        logger.info("%s: n0=%.6g phi=%.6g log_lik=%.6g", model.value, params.n0, params.phi, log_lik)
        return fit

    @staticmethod
    def _check_log(row: HazardRow, log: FailureLog) -> None:
        if row.stage_based and not log.is_grouped:
            raise ValidationError(f"{row.model.value} is fitted on grouped per-stage counts", field="kind")
        if not row.stage_based and log.is_grouped:
            raise ValidationError(f"{row.model.value} is fitted on inter-failure times", field="kind")
        log.require_events(GrowthDefaults.MIN_EVENTS, f"{row.model.value} fit")

    @staticmethod
    def _start(row: HazardRow, base: HazardParams, log: FailureLog, observed: int,
               free_extras: List[str]) -> np.ndarray:
        n0 = 1.2 * observed + 1.0
        params = base.with_values(n0=n0)
        if row.model is HazardModelId.BUCCHIANICO:
            rate = min(0.99, observed / log.total_time)
            phi_start = float(logit((1.0 - rate) ** (1.0 / n0)))
        else:
            phi = closed_form_phi(row.model, params, log)
            phi_start = math.log(phi) if phi > 0 else 0.0
        extras = [getattr(base, name) for name in free_extras]
        return np.array([math.log(n0 - observed), phi_start] + extras, dtype=float)

    def _integer_scan(self, model, params, log, observed, seed, objective, free_extras, unpack):
        """Best integer n0 within scan_radius of the continuous optimum, other parameters re-optimized"""
        centre = int(math.floor(params.n0))
        candidates = range(max(observed, centre - self.scan_radius), centre + self.scan_radius + 1)
        linear = model is not HazardModelId.BUCCHIANICO and not free_extras
        best_n0, best_log_lik, best_params = None, -math.inf, None
        for n0 in candidates:
            if linear:
                phi = closed_form_phi(model, params.with_values(n0=float(n0)), log)
                if not phi > 0:
                    continue
                candidate = params.with_values(n0=float(n0), phi=phi)
                value = log_likelihood(model, candidate, log)
            else:
                phi_start = float(logit(params.phi)) if model is HazardModelId.BUCCHIANICO else math.log(params.phi)
                start = np.array([phi_start] + [getattr(params, name) for name in free_extras], dtype=float)
                result = minimize_multistart(
                    lambda x, n=float(n0): objective(x, n), start,
                    seed=derive_seed(seed, n0), restarts=2, agreement_tol=self.agreement_tol,
                )
                if not result.finite:
                    continue
                candidate = unpack(result.x, float(n0))
                value = -result.fun
            if value > best_log_lik:
                best_n0, best_log_lik, best_params = n0, value, candidate
        return best_n0, (best_log_lik if best_params is not None else None), best_params


def fit(model, log: FailureLog, seed: Optional[int] = None, extras: Optional[Dict[str, float]] = None,
        fit_extras: bool = False, variant: str = "standard") -> GrowthFit:
    return GrowthAnalyzer().fit(model, log, seed=seed, extras=extras, fit_extras=fit_extras, variant=variant)


def _next_index(fit: GrowthFit) -> int:
    row = get_row(fit.model)
    if row.stage_based:
        return len(fit.params.stage_counts) + 1
    return fit.observed + 1


def predict_remaining(fit: GrowthFit, observed: Optional[int] = None) -> float:
    observed = fit.observed if observed is None else observed
    return max(0.0, fit.params.n0 - observed)


def _require_alive(fit: GrowthFit, i: int) -> None:
    row = get_row(fit.model)
    if row.remaining(fit.params, np.asarray(i)) <= 0:
        raise ExhaustedPopulation(
            f"no errors left at index {i}: fitted population is {fit.params.n0:.6g}"
        )


def mean_time_to_next(fit: GrowthFit, next_index: Optional[int] = None) -> float:
    """Expected dwell time in state `next_index`: 1/lambda for Markov rows, integral of the survival otherwise"""
    i = _next_index(fit) if next_index is None else next_index
    _require_alive(fit, i)
    row = get_row(fit.model)
    if row.markov:
        return 1.0 / hazard(fit.model, fit.params, i)

    p = fit.params
    if fit.model is HazardModelId.HYPERBOLIC and (p.a > 0 or (p.a == 0 and p.b < 0)):
        raise NonPositiveHazard(
            f"hyperbolic profile -a t^2 + b t + c with a={p.a}, b={p.b} turns negative; the dwell time has no mean"
        )
    value, _ = quad(lambda t: math.exp(-cumulative_hazard(fit.model, p, i, t)), 0.0, math.inf, limit=200)
    return float(value)


def reliability(fit: GrowthFit, next_index: Optional[int], tau: float) -> float:
    """Probability of no failure during a dwell time tau in state `next_index`"""
    if tau < 0:
        raise ValidationError(f"must be nonnegative, got {tau}", field="tau")
    i = _next_index(fit) if next_index is None else next_index
    return math.exp(-cumulative_hazard(fit.model, fit.params, i, tau))


def mean_time_to_complete(fit: GrowthFit, observed: Optional[int] = None) -> float:
    """Expected time to remove every remaining error, observed+1 .. floor(n0)"""
    if get_row(fit.model).stage_based:
        raise ValidationError(f"{fit.model.value} is indexed by stage, not by error", field="model")
    observed = fit.observed if observed is None else observed
    last = int(math.floor(fit.params.n0 + 1e-9))
    return float(sum(mean_time_to_next(fit, i) for i in range(observed + 1, last + 1)))


def complete_debugging_probability(fit: GrowthFit, observed: Optional[int], tau: float) -> float:
    """JM only: probability that all remaining errors are found within tau, (1 - e^{-phi tau})^(N - n)"""
    if fit.model is not HazardModelId.JM:
        raise ValidationError("complete-debugging probability is derived for the JM model only", field="model")
    if tau < 0:
        raise ValidationError(f"must be nonnegative, got {tau}", field="tau")
    observed = fit.observed if observed is None else observed
    remaining = max(0, int(math.floor(fit.params.n0 + 1e-9)) - observed)
    return float((-math.expm1(-fit.params.phi * tau)) ** remaining)
