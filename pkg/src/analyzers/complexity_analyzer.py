"""
A-priori defect prediction from code metrics: Halstead model and the TRW multifactor model
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import qr, solve_triangular

from ..models.errors import InsufficientData, RankDeficient, ValidationError
from ..models.estimate_models import (
    TRW_FACTOR_NAMES,
    HalsteadCounts,
    HalsteadReport,
    TrwFactors,
    TrwModel,
)
from ..utils.defaults import ComplexityDefaults

logger = logging.getLogger(__name__)

TRW_WEIGHTS = np.array(ComplexityDefaults.TRW_WEIGHTS)


def halstead_report(counts: HalsteadCounts, defect_divisor: Optional[float] = None) -> HalsteadReport:
    divisor = ComplexityDefaults.HALSTEAD_DEFECT_DIVISOR if defect_divisor is None else float(defect_divisor)
    if divisor <= 0:
        raise ValidationError(f"must be positive, got {divisor}", field="defect_divisor")
    eta1, eta2, n1, n2 = counts.eta1, counts.eta2, counts.n1, counts.n2
    vocabulary = eta1 + eta2
    length = n1 + n2
    volume = length * math.log2(vocabulary)
    return HalsteadReport(
        vocabulary=vocabulary,
        length=length,
        theoretical_length=eta1 * math.log2(eta1) + eta2 * math.log2(eta2),
        volume=volume,
        level=2.0 * eta2 / (eta1 * n2),
        effort=eta1 * n2 * length * math.log2(vocabulary) / (2.0 * eta2),
        predicted_defects=volume / divisor,
    )


def trw_complexity(factors: TrwFactors) -> float:
    """C = L_tot + 0.1 C_inf + 0.2 C_c + 0.4 C_io - 0.1 U_read"""
    return float(TRW_WEIGHTS @ factors.as_array())


def _design_matrix(samples: Sequence[Tuple[TrwFactors, float]]) -> Tuple[np.ndarray, np.ndarray]:
    x = np.array([f.as_array() for f, _ in samples]) * TRW_WEIGHTS
    y = np.array([float(observed) for _, observed in samples])
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise ValidationError("observed error counts must be finite and nonnegative", field="errors")
    return x, y


def trw_fit(samples: Sequence[Tuple[TrwFactors, float]], rank_tol: float = ComplexityDefaults.RANK_TOL) -> TrwModel:
    """Least-squares kappas through a column-pivoted QR of the pre-weighted factor matrix"""
    if len(samples) < ComplexityDefaults.MIN_TRW_SAMPLES:
        raise InsufficientData(
            f"TRW fit needs at least {ComplexityDefaults.MIN_TRW_SAMPLES} samples, got {len(samples)}"
        )
    x, y = _design_matrix(samples)
    q, r, pivot = qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rank_tol * max(diag[0], 1.0)))
    if rank < x.shape[1]:
        dependent = [TRW_FACTOR_NAMES[p] for p in pivot[rank:]]
        raise RankDeficient(
            f"factor columns are collinear; dependent: {', '.join(dependent)}",
            dependent_columns=dependent,
        )

    kappas = np.empty(x.shape[1])
    kappas[pivot] = solve_triangular(r, q.T @ y)
    residual = y - x @ kappas
    sse = float(residual @ residual)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r_squared = 1.0 - sse / sst if sst > 0 else float("nan")
    logger.debug("TRW fit on %d samples: sse=%.6g r2=%.6g", len(samples), sse, r_squared)
    return TrwModel(kappas=tuple(kappas), residual_sse=sse, r_squared=r_squared, n_samples=len(samples))


def trw_predict(model: TrwModel, factors: TrwFactors) -> float:
    return float((TRW_WEIGHTS * factors.as_array()) @ np.array(model.kappas))


def trw_sse(kappas: Sequence[float], samples: Sequence[Tuple[TrwFactors, float]]) -> float:
    x, y = _design_matrix(samples)
    residual = y - x @ np.asarray(kappas, dtype=float)
    return float(residual @ residual)
