"""
Run-domain reliability: Nelson input-domain estimate, multi-run products, the
bridge to a time-domain hazard, and the non-monotone upgrade model
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import binom

from ..models.errors import CertainFailure, DomainError, InsufficientData, NonConvergence, ValidationError
from ..models.estimate_models import NelsonEstimate, TimeDomainSeries, UpgradeModel, UpgradeTrajectory
from ..models.failure_data import RunProfile, UpgradeHistory, validate_probabilities
from ..utils.config import Config
from ..utils.defaults import FitDefaults, RunDomainDefaults
from ..utils.optimizer import minimize_multistart

logger = logging.getLogger(__name__)


def nelson_reliability(profile: RunProfile) -> NelsonEstimate:
    """P = 1 - sum (n_i / N_i) p_i"""
    rates = profile.failures / profile.runs
    reliability = 1.0 - math.fsum(rates * profile.probs)
    return NelsonEstimate(
        reliability=min(1.0, max(0.0, reliability)),
        per_domain_failure_rates=tuple(float(r) for r in rates),
    )


def _failure_probs(per_run_q: Sequence[float]) -> np.ndarray:
    q = validate_probabilities(per_run_q, "per_run_q")
    certain = np.flatnonzero(q >= 1.0)
    if certain.size:
        raise CertainFailure(f"run {int(certain[0]) + 1} fails with probability 1; reliability is 0")
    return q


def multirun_reliability(per_run_q: Sequence[float]) -> float:
    """P_u = prod (1 - Q_j), summed in log space"""
    q = _failure_probs(per_run_q)
    return math.exp(math.fsum(np.log1p(-q)))


def run_failure_prob(profile: RunProfile, failure_flags: Sequence[int]) -> np.ndarray:
    """Q_j = sum_i p_ji chi_i for each run; a profile without per-run rows is a single run over `probs`"""
    flags = np.asarray(failure_flags)
    if flags.shape != (len(profile.domains),) or not np.all(np.isin(flags, (0, 1))):
        raise ValidationError(f"expected {len(profile.domains)} flags of 0 or 1", field="failure_flags")
    matrix = np.atleast_2d(np.asarray(profile.run_probs if profile.run_probs is not None else profile.probs))
    return np.clip(matrix @ flags.astype(float), 0.0, 1.0)


def to_time_domain(per_run_q: Sequence[float], per_run_dt: Sequence[float]) -> TimeDomainSeries:
    """lambda(t_j) = -ln(1 - Q_j) / dt_j on the cumulative run clock"""
    q = _failure_probs(per_run_q)
    dt = np.asarray(per_run_dt, dtype=float)
    if dt.shape != q.shape:
        raise ValidationError(f"{q.size} failure probabilities but {dt.size} durations", field="per_run_dt")
    if np.any(~(dt > 0)) or not np.all(np.isfinite(dt)):
        raise ValidationError("run durations must be positive", field="per_run_dt")
    hazards = -np.log1p(-q) / dt
    return TimeDomainSeries(
        hazards=tuple(float(h) for h in hazards),
        cumulative_times=tuple(float(t) for t in np.cumsum(dt)),
        durations=tuple(float(d) for d in dt),
    )


def _stage_factors(model: UpgradeModel, history: UpgradeHistory) -> np.ndarray:
    """1 - (a1 k1j + a2 k2j) / P_inf for j = 1..U"""
    if model.p_inf == 0.0:
        return np.ones(len(history))
    efficiency = history.metrics @ np.array([model.a1, model.a2])
    return 1.0 - efficiency / model.p_inf


def _trajectory(model: UpgradeModel, factors: np.ndarray) -> np.ndarray:
    # stage 0 is the identity factor, so P_0 = p0
    products = np.concatenate([[1.0], np.cumprod(factors)])
    return model.p_inf - (model.p_inf - model.p0) * products


def _check_factors(factors: np.ndarray) -> None:
    bad = np.flatnonzero((factors <= -1.0) | (factors > 1.0))
    if bad.size:
        j = int(bad[0])
        raise DomainError(f"stage {j + 1} factor {factors[j]:.6g} leaves (-1, 1]; reliability would leave [0, 1]")


def upgrade_reliability(model: UpgradeModel, history: UpgradeHistory, u: int) -> float:
    """P_u = P_inf - (P_inf - P_0) prod_{j=0..u} (1 - sum_i a_i k_ij / P_inf)"""
    if not (0 <= u <= len(history)):
        raise ValidationError(f"stage index must lie in [0, {len(history)}], got {u}", field="u")
    factors = _stage_factors(model, history)[:u]
    _check_factors(factors)
    return float(_trajectory(model, factors)[-1])


def upgrade_trajectory(model: UpgradeModel, history: UpgradeHistory) -> UpgradeTrajectory:
    """P_0 .. P_U with increments dP_j = P_j - P_{j-1}, so P_u = P_0 + sum dP_j"""
    factors = _stage_factors(model, history)
    _check_factors(factors)
    reliabilities = _trajectory(model, factors)
    return UpgradeTrajectory(
        reliabilities=tuple(float(p) for p in reliabilities),
        increments=tuple(float(d) for d in np.diff(reliabilities)),
    )


def upgrade_log_likelihood(model: UpgradeModel, history: UpgradeHistory) -> float:
    """Binomial log-likelihood of the stage successes, stage j measuring P_j"""
    factors = _stage_factors(model, history)
    if np.any((factors <= -1.0) | (factors > 1.0)):
        return -math.inf
    p = np.clip(_trajectory(model, factors)[1:], 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return float(np.sum(binom.logpmf(history.successes, history.runs, p)))


def fit_upgrade_model(history: UpgradeHistory, seed: Optional[int] = None) -> UpgradeModel:
    """Four-parameter MLE over (P_inf, q = P_0 / P_inf, a1, a2) inside [0, 1]^2 x [0, a_max]^2"""
    if len(history) < RunDomainDefaults.MIN_STAGES:
        raise InsufficientData(
            f"upgrade fit needs at least {RunDomainDefaults.MIN_STAGES} stages, got {len(history)}"
        )
    seed = Config.get_default_seed() if seed is None else seed
    a_max = RunDomainDefaults.MAX_EFFICIENCY
    bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, a_max), (0.0, a_max)]

    def unpack(x) -> UpgradeModel:
        p_inf, q, a1, a2 = (float(v) for v in x)
        return UpgradeModel(p0=q * p_inf, p_inf=p_inf, a1=a1, a2=a2)

    def objective(x) -> float:
        return -upgrade_log_likelihood(unpack(x), history)

    rates = history.successes / history.runs
    p_inf0 = min(0.999, max(float(rates.max()), 1e-3))
    x0 = [p_inf0, min(1.0, float(rates[0]) / p_inf0), 0.1, 0.1]
    result = minimize_multistart(objective, x0, seed=seed, bounds=bounds)

    best = unpack(result.x)
    log_lik = -result.fun if result.finite else -math.inf
    model = UpgradeModel(
        p0=best.p0, p_inf=best.p_inf, a1=best.a1, a2=best.a2,
        fitted_log_lik=log_lik,
        converged=result.converged(FitDefaults.MIN_AGREEING) and math.isfinite(log_lik),
    )
    if not model.converged:
        raise NonConvergence(
            f"upgrade fit: {result.agreeing} of {len(result.restarts)} restarts agree on log-likelihood {log_lik:.6g}",
            fit=model,
        )
    logger.info("upgrade fit: p0=%.4g p_inf=%.4g a1=%.4g a2=%.4g log_lik=%.6g",
                model.p0, model.p_inf, model.a1, model.a2, log_lik)
    return model


def upgrades_to_target(p0: float, target: float, a: float) -> int:
    """ceil(|ln((1 - P_0)/(1 - P_u))| / |ln(1 - a)|), at least one upgrade"""
    if not (0.0 <= p0 < 1.0):
        raise ValidationError(f"must lie in [0, 1), got {p0}", field="p0")
    if not (p0 < target < 1.0):
        raise ValidationError(f"must lie in (p0, 1), got {target}", field="target")
    if not (0.0 < a < 1.0):
        raise ValidationError(f"must lie in (0, 1), got {a}", field="a")
    ratio = abs(math.log((1.0 - p0) / (1.0 - target))) / abs(math.log1p(-a))
    return max(1, math.ceil(ratio))
