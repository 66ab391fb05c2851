"""
Seeded multi-restart Nelder-Mead search shared by every maximum-likelihood fitter
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .defaults import FitDefaults
from .rng import make_rng

logger = logging.getLogger(__name__)

PENALTY = 1e300


@dataclass(frozen=True)
class RestartResult:
    x: np.ndarray
    fun: float
    nit: int


@dataclass(frozen=True)
class MultiStartResult:
    x: np.ndarray
    fun: float
    iterations: int
    agreeing: int
    restarts: Tuple[RestartResult, ...]

    @property
    def finite(self) -> bool:
        return self.fun < PENALTY

    def converged(self, min_agreeing: int = FitDefaults.MIN_AGREEING) -> bool:
        return self.finite and self.agreeing >= min(min_agreeing, len(self.restarts))


def _guarded(objective: Callable[[np.ndarray], float]) -> Callable[[np.ndarray], float]:
    def wrapped(x: np.ndarray) -> float:
        try:
            value = float(objective(x))
        except (ArithmeticError, ValueError):
            return PENALTY
        return value if math.isfinite(value) else PENALTY
    return wrapped


def _initial_simplex(x0: np.ndarray, bounds: Optional[Sequence[Tuple[float, float]]]) -> np.ndarray:
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        step = 0.1 * max(1.0, abs(x0[i]))
        if bounds is not None:
            lo, hi = bounds[i]
            step = min(step, 0.25 * (hi - lo))
            if x0[i] + step > hi:
                step = -step
        simplex[i + 1, i] += step
    return simplex


def _run_simplex(objective, x0, bounds, xatol, fatol, maxiter) -> RestartResult:
    total_nit = 0
    x = x0
    fun = objective(x)
    # restart once from the optimum with a fresh simplex to escape early collapse
    for _ in range(2):
        result = minimize(
            objective,
            x,
            method="Nelder-Mead",
            bounds=bounds,
            options={
                "initial_simplex": _initial_simplex(x, bounds),
                "xatol": xatol,
                "fatol": fatol,
                "maxiter": maxiter,
                "maxfev": 2 * maxiter,
                "adaptive": x.size > 3,
            },
        )
        total_nit += int(result.nit)
        if result.fun <= fun:
            x, fun = np.asarray(result.x, dtype=float), float(result.fun)
    return RestartResult(x=x, fun=fun, nit=total_nit)


def minimize_multistart(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    seed: int,
    restarts: int = FitDefaults.RESTARTS,
    spread: float = FitDefaults.RESTART_SPREAD,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
    agreement_tol: float = FitDefaults.AGREEMENT_TOL,
    xatol: float = FitDefaults.XATOL,
    fatol: float = FitDefaults.FATOL,
) -> MultiStartResult:
    """Minimize from x0 and restarts-1 seeded perturbations of it

    Without bounds the perturbations are Gaussian with scale `spread` in the
    (already transformed) parameter space; with bounds they are uniform in
    the box. Deterministic given the seed.
    """
    x0 = np.asarray(x0, dtype=float)
    if bounds is not None:
        lower = np.array([lo for lo, _ in bounds])
        upper = np.array([hi for _, hi in bounds])
        x0 = np.clip(x0, lower, upper)
    rng = make_rng(seed)
    guarded = _guarded(objective)
    maxiter = FitDefaults.MAX_ITER_PER_PARAM * max(1, x0.size)

    starts = [x0]
    for _ in range(max(0, restarts - 1)):
        if bounds is None:
            starts.append(x0 + rng.normal(0.0, spread, size=x0.size))
        else:
            starts.append(rng.uniform(lower, upper))

    results = tuple(_run_simplex(guarded, start, bounds, xatol, fatol, maxiter) for start in starts)
    best = min(results, key=lambda r: r.fun)
    agreeing = sum(1 for r in results if r.fun <= best.fun + agreement_tol)
    logger.debug(
        "multistart: best=%.10g agreeing=%d/%d iterations=%d",
        best.fun, agreeing, len(results), sum(r.nit for r in results),
    )
    return MultiStartResult(
        x=best.x,
        fun=best.fun,
        iterations=sum(r.nit for r in results),
        agreeing=agreeing,
        restarts=results,
    )
