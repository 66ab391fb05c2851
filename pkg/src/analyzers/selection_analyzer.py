"""
Model comparison: information criteria, prequential one-step prediction error,
the weighted integrated criterion, and ranking across fitted candidates
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.errors import InsufficientData, NonConvergence, RelGrowthError, ValidationError
from ..models.failure_data import FailureLog
from ..models.fit_models import (
    GrowthFit,
    HazardModelId,
    ModelScore,
    NhppFit,
    NhppModelId,
    PrequentialResult,
    restart_warning,
)
from ..utils.config import Config
from ..utils.defaults import SelectionDefaults
from ..utils.rng import derive_seed
from . import growth_analyzer, nhpp_analyzer
from .hazard_catalog import cumulative_hazard, get_row

logger = logging.getLogger(__name__)

CRITERIA = ("aic", "bic", "sse", "ic")
IC_FOOTNOTE = "AIC = 2k - 2 lnL and BIC = k ln(n) - 2 lnL use the standard definitions"

Fit = Union[GrowthFit, NhppFit]


@dataclass(frozen=True)
class NhppCandidate:
    model: NhppModelId
    start: Optional[Dict[str, float]] = None
    variant: str = ""

    @property
    def name(self) -> str:
        return f"{self.model.value}:{self.variant}" if self.variant else self.model.value

    def fit(self, log: FailureLog, seed: int) -> NhppFit:
        return nhpp_analyzer.fit(self.model, log, seed=seed, start=self.start, variant=self.variant)

    def predict_next(self, fit: NhppFit, log: FailureLog, next_duration: Optional[float]) -> Optional[float]:
        if log.is_grouped:
            return log.n_events + nhpp_analyzer.predict(fit, next_duration).expected_new
        return nhpp_analyzer.time_to_next_expected(fit, log.total_time)


@dataclass(frozen=True)
class GrowthCandidate:
    model: HazardModelId
    extras: Optional[Dict[str, float]] = None
    fit_extras: bool = False
    variant: str = "standard"

    @property
    def name(self) -> str:
        return self.model.value

    def fit(self, log: FailureLog, seed: int) -> GrowthFit:
        return growth_analyzer.fit(self.model, log, seed=seed, extras=self.extras,
                                   fit_extras=self.fit_extras, variant=self.variant)

    def predict_next(self, fit: GrowthFit, log: FailureLog, next_duration: Optional[float]) -> Optional[float]:
        if get_row(self.model).stage_based:
            stage = len(log.bins) + 1
            return log.n_events + cumulative_hazard(self.model, fit.params, stage, next_duration)
        return log.total_time + growth_analyzer.mean_time_to_next(fit)


Candidate = Union[NhppCandidate, GrowthCandidate]


def candidate_for(name: str, start: Optional[Dict[str, float]] = None) -> Candidate:
    """Resolve a model id from either family; `model:variant` selects a catalog variant"""
    model, _, variant = name.partition(":")
    try:
        return NhppCandidate(NhppModelId(model), start=start, variant=variant)
    except ValueError:
        pass
    try:
        return GrowthCandidate(HazardModelId(model), extras=start, variant=variant or "standard")
    except ValueError:
        raise ValidationError(f"unknown model {name!r}", field="model") from None


def information_criteria(log_lik: float, n_params: int, n_obs: int) -> Tuple[float, float]:
    if n_obs < 1:
        raise ValidationError(f"must be at least 1, got {n_obs}", field="n_obs")
    aic = 2.0 * n_params - 2.0 * log_lik
    bic = n_params * math.log(n_obs) - 2.0 * log_lik
    return aic, bic


def _window(candidate: Candidate, log: FailureLog, i: int, seed: int) -> Tuple[int, Optional[float], str]:
    """Fit the first i observations and predict observation i+1"""
    head = log.truncated(i)
    if log.is_grouped:
        actual = float(np.sum(log.counts[: i + 1]))
        next_duration = float(log.durations[i])
    else:
        actual = float(log.event_times[i])
        next_duration = None
    try:
        fit = candidate.fit(head, derive_seed(seed, i))
        predicted = candidate.predict_next(fit, head, next_duration)
    except RelGrowthError as exc:
        return i, None, f"{exc.code}: {exc}"
    if predicted is None or not math.isfinite(predicted):
        return i, None, "no finite prediction"
    return i, (predicted - actual) ** 2, ""


def one_step_prediction_error(
    candidate: Candidate,
    log: FailureLog,
    seed: Optional[int] = None,
    start_fraction: float = SelectionDefaults.PREQUENTIAL_START_FRACTION,
    workers: Optional[int] = None,
) -> PrequentialResult:
    """Prequential SSE over windows i = ceil(n * start_fraction) .. n-1

    Windows whose fit or prediction fails are skipped and listed with the reason.
    """
    n = log.n_observations
    if n < SelectionDefaults.MIN_EVENTS:
        raise InsufficientData(f"prequential scoring needs at least {SelectionDefaults.MIN_EVENTS} observations, got {n}")
    if not (0.0 < start_fraction < 1.0):
        raise ValidationError(f"must lie in (0, 1), got {start_fraction}", field="start_fraction")
    seed = Config.get_default_seed() if seed is None else seed
    workers = Config.get_workers() if workers is None else workers
    windows = range(max(1, math.ceil(n * start_fraction)), n)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        outcomes = list(pool.map(lambda i: _window(candidate, log, i, seed), windows))

    scored = [(i, err) for i, err, _ in outcomes if err is not None]
    skipped = tuple((i, reason) for i, err, reason in outcomes if err is None)
    for i, reason in skipped:
        logger.warning("%s: prequential window %d skipped (%s)", candidate.name, i, reason)
    sse = math.fsum(err for _, err in scored) if scored else math.nan
    return PrequentialResult(
        sse=sse,
        windows=tuple(i for i, _ in scored),
        skipped=skipped,
        squared_errors=tuple(err for _, err in scored),
    )


def integrated_criterion(weights: Sequence[float], flags: Sequence[bool]) -> float:
    """IC = sum k_i chi_i for one candidate"""
    if len(weights) != len(flags):
        raise ValidationError(f"{len(weights)} weights but {len(flags)} flags", field="flags")
    if any(w < 0 for w in weights):
        raise ValidationError("weights must be nonnegative", field="weights")
    return math.fsum(w for w, chi in zip(weights, flags) if chi)


def _criterion_value(score: ModelScore, by: str) -> Optional[float]:
    return {"aic": score.aic, "bic": score.bic, "sse": score.one_step_sse, "one_step_sse": score.one_step_sse,
            "ic": score.ic}[by]


def rank_models(scores: Sequence[ModelScore], by: str = "aic") -> List[ModelScore]:
    """Best first; ties go to fewer parameters, then model id. Missing or NaN values sort last."""
    if by not in CRITERIA and by != "one_step_sse":
        raise ValidationError(f"unknown criterion {by!r}; use one of {', '.join(CRITERIA)}", field="by")
    if not scores:
        raise ValidationError("nothing to rank", field="scores")
    sign = -1.0 if by == "ic" else 1.0

    def key(score: ModelScore):
        value = _criterion_value(score, by)
        missing = value is None or math.isnan(value)
        return (missing, 0.0 if missing else sign * value, score.n_params, score.model)

    return sorted(scores, key=key)


def _numeric_params(fit: Fit) -> Dict[str, float]:
    if isinstance(fit, NhppFit):
        return dict(fit.params.values)
    return {k: v for k, v in fit.params.to_dict().items() if isinstance(v, (int, float)) and not isinstance(v, bool)}


def score_fit(name: str, fit: Fit, log: FailureLog, one_step_sse: Optional[float] = None,
              ic: Optional[float] = None) -> ModelScore:
    aic, bic = information_criteria(fit.log_lik, fit.n_fitted, log.n_observations)
    return ModelScore(
        model=name,
        log_lik=fit.log_lik,
        n_params=fit.n_fitted,
        n_obs=log.n_observations,
        aic=aic,
        bic=bic,
        one_step_sse=one_step_sse,
        ic=ic,
        params=_numeric_params(fit),
    )


@dataclass(frozen=True)
class ComparisonReport:
    criterion: str
    scores: Tuple[ModelScore, ...]
    ranking: Tuple[str, ...]
    warnings: Tuple[str, ...] = ()
    skipped_windows: Dict[str, List[int]] = field(default_factory=dict)

    @property
    def best(self) -> str:
        return self.ranking[0]

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "candidates": [
                {
                    "model": s.model,
                    "params": dict(s.params),
                    "log_lik": s.log_lik,
                    "n_params": s.n_params,
                    "aic": s.aic,
                    "bic": s.bic,
                    "one_step_sse": s.one_step_sse,
                    "ic": s.ic,
                }
                for s in self.scores
            ],
            "ranking": list(self.ranking),
            "warnings": list(self.warnings),
            "skipped_windows": {k: list(v) for k, v in self.skipped_windows.items()},
            "note": IC_FOOTNOTE,
        }


def compare_models(
    candidates: Sequence[Candidate],
    log: FailureLog,
    seed: Optional[int] = None,
    criterion: str = "aic",
    ic_weights: Optional[Sequence[float]] = None,
    ic_flags: Optional[Dict[str, Sequence[bool]]] = None,
    workers: Optional[int] = None,
) -> ComparisonReport:
    """Fit every candidate over the shared log, score, and rank by `criterion`"""
    if not candidates:
        raise ValidationError("no candidate models", field="models")
    if criterion not in CRITERIA:
        raise ValidationError(f"unknown criterion {criterion!r}; use one of {', '.join(CRITERIA)}", field="criterion")
    if criterion == "ic" and (ic_weights is None or ic_flags is None):
        raise ValidationError("the integrated criterion needs weights and per-model flags", field="ic_weights")
    seed = Config.get_default_seed() if seed is None else seed
    workers = Config.get_workers() if workers is None else workers
    warnings: List[str] = []

    def fit_one(candidate: Candidate) -> Fit:
        try:
            fitted = candidate.fit(log, seed)
        except NonConvergence as exc:
            if exc.fit is None:
                raise
            warnings.append(f"{candidate.name}: {exc}")
            return exc.fit
        note = restart_warning(fitted)
        if note:
            warnings.append(note)
        return fitted

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        fits = list(pool.map(fit_one, candidates))

    skipped: Dict[str, List[int]] = {}
    scores = []
    for candidate, fitted in zip(candidates, fits):
        sse = None
        if criterion == "sse":
            result = one_step_prediction_error(candidate, log, seed=seed, workers=workers)
            sse = result.sse
            if result.skipped:
                skipped[candidate.name] = result.skipped_windows
                warnings.append(f"{candidate.name}: {len(result.skipped)} prequential windows skipped")
        ic = None
        if criterion == "ic":
            if candidate.name not in ic_flags:
                raise ValidationError(f"no integrated-criterion flags for {candidate.name}", field="ic_flags")
            ic = integrated_criterion(ic_weights, ic_flags[candidate.name])
        scores.append(score_fit(candidate.name, fitted, log, one_step_sse=sse, ic=ic))

    ranking = tuple(s.model for s in rank_models(scores, criterion))
    logger.info("ranking by %s: %s", criterion, ", ".join(ranking))
    return ComparisonReport(
        criterion=criterion,
        scores=tuple(scores),
        ranking=ranking,
        warnings=tuple(sorted(warnings)),
        skipped_windows=skipped,
    )
