"""
Seeded generative samplers for every model family

All draws go through utils.rng, so each sampler is a pure function of its
arguments and seed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Sequence, TypeVar, Union

import numpy as np

from ..analyzers import nhpp_catalog, rundomain_analyzer
from ..models.errors import UnboundedIntensity, ValidationError
from ..models.estimate_models import UpgradeModel
from ..models.failure_data import (
    DomainTally,
    FailureLog,
    PartitionTrace,
    RunProfile,
    SeedingTally,
    UpgradeHistory,
    UpgradeStage,
)
from ..models.fit_models import HazardModelId, HazardParams, NhppModelId, NhppParams
from ..utils.defaults import SimulationDefaults
from ..utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _population(params: HazardParams) -> int:
    n = params.n0
    if n < 1 or not float(n).is_integer():
        raise ValidationError(f"simulation needs an integer population N >= 1, got {n}", field="n0")
    return int(n)


def _truncate(intervals: np.ndarray, horizon: float) -> FailureLog:
    if math.isinf(horizon):
        return FailureLog.from_intervals(intervals.tolist())
    times = np.cumsum(intervals)
    kept = intervals[times <= horizon]
    return FailureLog.from_intervals(kept.tolist(), total_time=horizon)


def simulate_jm(params: HazardParams, seed: int, horizon: float = math.inf) -> FailureLog:
    """Exponential dwell times with rate phi (N - i + 1), i = 1..N, cut at the horizon"""
    n = _population(params)
    rates = params.phi * (n - np.arange(n))
    intervals = make_rng(seed).exponential(1.0 / rates)
    return _truncate(intervals, horizon)


def simulate_sw(params: HazardParams, seed: int, horizon: float = math.inf) -> FailureLog:
    """Rayleigh dwell times: Lambda_i(t) = r t^2 / 2 with r = phi (N - i + 1), inverted from Exp(1) draws"""
    n = _population(params)
    rates = params.phi * (n - np.arange(n))
    intervals = np.sqrt(2.0 * make_rng(seed).exponential(1.0, size=n) / rates)
    return _truncate(intervals, horizon)


def _piece_edges(horizon: float, unbounded: bool) -> np.ndarray:
    pieces = SimulationDefaults.THINNING_PIECES
    if unbounded:
        eps = horizon * SimulationDefaults.UNBOUNDED_EPS_FRACTION
        return np.geomspace(eps, horizon, pieces + 1)
    return np.linspace(0.0, horizon, pieces + 1)


def _piece_bounds(model, params: NhppParams, edges: np.ndarray) -> np.ndarray:
    bounds = np.empty(edges.size - 1)
    for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        grid = np.linspace(lo, hi, SimulationDefaults.THINNING_SUBGRID)
        peak = float(np.max(nhpp_catalog.intensity(model, params, grid)))
        if not math.isfinite(peak):
            raise UnboundedIntensity(
                f"{NhppModelId(model).value} intensity has no finite bound on [{lo:.6g}, {hi:.6g}]"
            )
        bounds[j] = SimulationDefaults.THINNING_SAFETY * max(peak, 0.0)
    return bounds


def simulate_nhpp(model, params: NhppParams, horizon: float, seed: int) -> FailureLog:
    """Event times on (0, T] by thinning against a piecewise-constant bound

    Intensities unbounded at 0 get geometric pieces on [eps, T]; the sliver
    (0, eps] receives Poisson(m(eps) - m(0)) uniform events.
    """
    if horizon < 0 or not math.isfinite(horizon):
        raise ValidationError(f"horizon must be finite and nonnegative, got {horizon}", field="horizon")
    if horizon == 0:
        return FailureLog.from_intervals([], total_time=0.0)

    rng = make_rng(seed)
    unbounded = nhpp_catalog.unbounded_at_zero(model, params)
    edges = _piece_edges(horizon, unbounded)
    bounds = _piece_bounds(model, params, edges)

    events = []
    if unbounded:
        eps = float(edges[0])
        sliver = float(nhpp_catalog.mean_value(model, params, eps) - nhpp_catalog.mean_value(model, params, 0.0))
        count = rng.poisson(max(sliver, 0.0))
        events.append(eps * (1.0 - rng.random(count)))

    proposed = accepted = 0
    overshoot = 0.0
    for lo, hi, bound in zip(edges[:-1], edges[1:], bounds):
        if bound <= 0:
            continue
        count = rng.poisson(bound * (hi - lo))
        if count == 0:
            continue
        # (lo, hi] keeps every event strictly after 0
        candidates = lo + (hi - lo) * (1.0 - rng.random(count))
        ratio = nhpp_catalog.intensity(model, params, candidates) / bound
        overshoot = max(overshoot, float(np.max(ratio)))
        keep = rng.random(count) < ratio
        proposed += count
        accepted += int(np.count_nonzero(keep))
        events.append(candidates[keep])

    if overshoot > 1.0:
        logger.warning("%s: intensity exceeded its thinning bound by %.3gx", NhppModelId(model).value, overshoot)
    logger.debug("thinning acceptance %d/%d", accepted, proposed)

    times = np.sort(np.concatenate(events)) if events else np.empty(0)
    intervals = np.diff(times, prepend=0.0)
    intervals = intervals[intervals > 0]
    return FailureLog.from_intervals(intervals.tolist(), total_time=horizon)


def simulate_runs(failure_rates: Sequence[float], probs: Sequence[float],
                  runs: Union[int, Sequence[int]], seed: int) -> RunProfile:
    """Binomial failure counts per domain; `runs` is per domain (one int applies to all)"""
    rates = np.asarray(failure_rates, dtype=float)
    if np.any((rates < 0) | (rates > 1)):
        raise ValidationError("failure rates must lie in [0, 1]", field="failure_rates")
    if len(probs) != rates.size:
        raise ValidationError(f"{rates.size} rates but {len(probs)} probabilities", field="probs")
    counts = np.broadcast_to(np.asarray(runs), rates.shape)
    failures = make_rng(seed).binomial(counts, rates)
    return RunProfile(domains=tuple(
        DomainTally(prob=float(p), runs=int(n), failures=int(f)) for p, n, f in zip(probs, counts, failures)
    ))


def simulate_seeding(true_n: int, seeded: int, found_total: int, seed: int) -> SeedingTally:
    """v seeded errors among found_total equally probable detections out of N + S"""
    if min(true_n, seeded, found_total) < 0:
        raise ValidationError("counts must be nonnegative", field="found_total")
    if found_total > true_n + seeded:
        raise ValidationError(f"cannot find {found_total} of {true_n + seeded} errors", field="found_total")
    v = int(make_rng(seed).hypergeometric(seeded, true_n, found_total)) if found_total else 0
    return SeedingTally(seeded=seeded, seeded_found=v, own_found=found_total - v)


def simulate_partition_trace(n1: int, n2: int, detections: int, seed: int) -> PartitionTrace:
    """Sequential removals, each detection drawn from Part 2 with probability remaining2 / remaining"""
    if min(n1, n2, detections) < 0 or detections > n1 + n2:
        raise ValidationError(f"cannot make {detections} detections from {n1} + {n2} errors", field="detections")
    rng = make_rng(seed)
    left1, left2, flags = n1, n2, []
    for u in rng.random(detections):
        part2 = u < left2 / (left1 + left2)
        flags.append(int(part2))
        if part2:
            left2 -= 1
        else:
            left1 -= 1
    return PartitionTrace(flags=tuple(flags))


def simulate_upgrade_history(model: UpgradeModel, k1: Sequence[float], k2: Sequence[float],
                             runs: Union[int, Sequence[int]], seed: int) -> UpgradeHistory:
    """Binomial successes per stage at the model's P_j"""
    if len(k1) != len(k2):
        raise ValidationError(f"{len(k1)} k1 metrics but {len(k2)} k2 metrics", field="k2")
    counts = np.broadcast_to(np.asarray(runs), (len(k1),))
    skeleton = UpgradeHistory(stages=tuple(UpgradeStage(float(a), float(b), int(n), 0)
                                           for a, b, n in zip(k1, k2, counts)))
    reliabilities = np.clip(rundomain_analyzer.upgrade_trajectory(model, skeleton).reliabilities[1:], 0.0, 1.0)
    successes = make_rng(seed).binomial(counts, reliabilities)
    return UpgradeHistory(stages=tuple(
        UpgradeStage(s.k1, s.k2, s.runs, int(x)) for s, x in zip(skeleton.stages, successes)
    ))


def replicate(sampler: Callable[[int], T], seed: int, n: int, workers: int = 1) -> List[T]:
    """n independent draws, replication i seeded with derive_seed(seed, i); order is independent of workers"""
    seeds = [derive_seed(seed, i) for i in range(n)]
    if workers <= 1:
        return [sampler(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(sampler, seeds))


@dataclass(frozen=True)
class SimConfig:
    """One simulation request: model and parameters of either time-domain family, horizon, replications"""
    seed: int
    model: str
    params: Union[HazardParams, NhppParams]
    horizon: float = math.inf
    replications: int = 1

    def __post_init__(self):
        if self.seed < 0:
            raise ValidationError(f"seed must be nonnegative, got {self.seed}", field="seed")
        if not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}", field="horizon")
        if self.replications < 1:
            raise ValidationError(f"need at least one replication, got {self.replications}", field="replications")

    def sampler(self) -> Callable[[int], FailureLog]:
        if isinstance(self.params, NhppParams):
            if math.isinf(self.horizon):
                raise ValidationError("NHPP simulation needs a finite horizon", field="horizon")
            model = NhppModelId(self.model)
            return lambda s: simulate_nhpp(model, self.params, self.horizon, s)
        model = HazardModelId(self.model)
        if model is HazardModelId.JM:
            return lambda s: simulate_jm(self.params, s, self.horizon)
        if model is HazardModelId.SW:
            return lambda s: simulate_sw(self.params, s, self.horizon)
        raise ValidationError(f"no sampler for {model.value}; growth simulation covers jm and sw", field="model")

    def run(self, workers: int = 1) -> List[FailureLog]:
        if self.replications == 1:
            return [self.sampler()(self.seed)]
        return replicate(self.sampler(), self.seed, self.replications, workers)
