"""
Test-confidence estimators: seeded errors, two-part partition, functional objects, independent groups
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy.special import gammaln

from ..models.errors import DegenerateInput, Unbounded, ValidationError
from ..models.estimate_models import EstimateMethod, PopulationEstimate
from ..models.failure_data import GroupTally, PartitionTrace, SeedingTally
from ..utils.defaults import SeedingDefaults

logger = logging.getLogger(__name__)


def _require_count(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 0:
        raise ValidationError(f"must be a nonnegative integer, got {value!r}", field=name)
    return int(value)


def _log_comb(n: int, k: int) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def _log_falling(n, k: int):
    """ln n(n-1)...(n-k+1), elementwise over n"""
    return gammaln(np.asarray(n, dtype=float) + 1) - gammaln(np.asarray(n, dtype=float) - k + 1)


def mills_estimate(tally: SeedingTally) -> PopulationEstimate:
    """N = S n / v"""
    if tally.seeded_found == 0:
        raise DegenerateInput(
            "no seeded errors found, so S*n/v is undefined; "
            "bound the error count with mills_confidence_full / mills_confidence_partial instead"
        )
    n_hat = tally.seeded * tally.own_found / tally.seeded_found
    return PopulationEstimate(
        n_hat=n_hat,
        method=EstimateMethod.MILLS,
        observed=tally.own_found,
        auxiliary={"seeded": tally.seeded, "seeded_found": tally.seeded_found},
    )


def mills_confidence_full(seeded: int, own_found: int, claim: int) -> float:
    """Confidence that the code holds at most `claim` own errors once all S seeded errors are found"""
    seeded = _require_count(seeded, "seeded")
    own_found = _require_count(own_found, "own_found")
    claim = _require_count(claim, "claim")
    if own_found > claim:
        return 1.0
    return seeded / (seeded + claim + 1)


def mills_confidence_partial(seeded: int, seeded_found: int, own_found: int, claim: int) -> float:
    """Same confidence when only v of the S seeded errors were found: C(S, v-1) / C(S+k+1, k+v)"""
    seeded = _require_count(seeded, "seeded")
    seeded_found = _require_count(seeded_found, "seeded_found")
    own_found = _require_count(own_found, "own_found")
    claim = _require_count(claim, "claim")
    if not (1 <= seeded_found <= seeded):
        raise ValidationError(f"must lie in [1, S={seeded}], got {seeded_found}", field="seeded_found")
    if own_found > claim:
        return 1.0
    log_ratio = _log_comb(seeded, seeded_found - 1) - _log_comb(seeded + claim + 1, claim + seeded_found)
    return math.exp(log_ratio)


def seeds_required(claim: int, confidence: float) -> int:
    """Fewest seeded errors S for which S/(S+k+1) reaches `confidence`"""
    claim = _require_count(claim, "claim")
    if not (0.0 < confidence < 1.0):
        raise ValidationError(f"must lie in (0, 1), got {confidence}", field="confidence")
    seeded = math.ceil(confidence * (claim + 1) / (1.0 - confidence))
    # float guard: step down while the smaller S still meets the target
    while seeded > 0 and (seeded - 1) / (seeded + claim) >= confidence:
        seeded -= 1
    while seeded / (seeded + claim + 1) < confidence:
        seeded += 1
    return seeded


def partition_log_likelihood(trace: PartitionTrace, n1, n2):
    """Sequential-detection log-likelihood ln L(N1, N2), broadcasting over arrays of N1 and N2

    The j-th detection sees N1 - (part-1 found so far) and N2 - (part-2 found
    so far) remaining errors, so the product of its p1/p2 terms telescopes
    into falling factorials.
    """
    a, b, n = trace.found_part1, trace.found_part2, len(trace.flags)
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    return _log_falling(n1, a) + _log_falling(n2, b) - _log_falling(n1 + n2, n)


def partition_estimate(trace: PartitionTrace, n_max: Optional[int] = None) -> PopulationEstimate:
    """Grid-search MLE of (N1, N2) over [found1, n_max] x [found2, n_max]"""
    n = len(trace.flags)
    if n == 0:
        raise ValidationError("partition trace is empty", field="flags")
    a, b = trace.found_part1, trace.found_part2
    if n_max is None:
        n_max = SeedingDefaults.PARTITION_GRID_MULTIPLIER * n
    if n_max <= max(a, b):
        raise ValidationError(f"n_max={n_max} must exceed the detections in either part", field="n_max")

    grid1 = np.arange(a, n_max + 1)
    grid2 = np.arange(b, n_max + 1)
    surface = partition_log_likelihood(trace, grid1[:, None], grid2[None, :])
    # first maximum in row-major order: ties go to the smallest (N1, N2)
    near_best = surface.ravel() >= np.max(surface) - SeedingDefaults.PARTITION_TIE_TOL
    i, j = np.unravel_index(int(np.flatnonzero(near_best)[0]), surface.shape)
    n1_hat, n2_hat = int(grid1[i]), int(grid2[j])
    log_lik = float(surface[i, j])
    logger.debug("partition grid %dx%d: N1=%d N2=%d lnL=%.6g", grid1.size, grid2.size, n1_hat, n2_hat, log_lik)

    if n1_hat == n_max or n2_hat == n_max:
        raise Unbounded(
            f"likelihood still rising at the grid edge n_max={n_max} (N1={n1_hat}, N2={n2_hat}); "
            "widen n_max or collect more detections"
        )
    return PopulationEstimate(
        n_hat=float(n1_hat + n2_hat),
        method=EstimateMethod.PARTITION,
        observed=n,
        auxiliary={"n1_hat": n1_hat, "n2_hat": n2_hat, "log_lik": log_lik, "n_max": n_max},
    )


def functional_objects_estimate(tally: SeedingTally) -> PopulationEstimate:
    """N = n (M_fo - m_fo + 1) / ((p/100) M_fo - s)"""
    if not tally.has_functional_objects:
        raise ValidationError("functional-objects estimate needs total_fo, sampled_fo and control_pct")
    denominator = tally.control_pct / 100.0 * tally.total_fo - tally.seeded_found
    if denominator <= 0:
        raise DegenerateInput(
            f"more seeded errors found ({tally.seeded_found}) than the controlled share "
            f"{tally.control_pct}% of {tally.total_fo} functional objects allows"
        )
    n_hat = tally.own_found * (tally.total_fo - tally.sampled_fo + 1) / denominator
    return PopulationEstimate(
        n_hat=n_hat,
        method=EstimateMethod.FUNCTIONAL_OBJECTS,
        observed=tally.own_found,
        auxiliary={"denominator": denominator},
    )


def groups_estimate(tally: GroupTally) -> PopulationEstimate:
    """N = N1 N2 / N12, with group efficiencies E_i = N_i / N"""
    if tally.common_found == 0:
        raise DegenerateInput("the groups share no findings; N1*N2/N12 diverges")
    n_hat = tally.group1_found * tally.group2_found / tally.common_found
    return PopulationEstimate(
        n_hat=n_hat,
        method=EstimateMethod.GROUPS,
        observed=tally.group1_found + tally.group2_found - tally.common_found,
        auxiliary={
            "efficiency1": tally.group1_found / n_hat,
            "efficiency2": tally.group2_found / n_hat,
        },
    )
