import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from annulus_restriction.errors import DomainError
from annulus_restriction.logspace import signed_logsumexp
from annulus_restriction.restriction import MIN_DECOMPOSITION_EXPONENT, MIN_EXPONENT, F_bounds, decomposition_upper
from annulus_restriction.util import worker_count

logger = logging.getLogger(__name__)

DEFAULT_GRID = (-0.2, -0.15, -0.1, -0.07, -0.05)
EXTENDED_GRID = (-0.1, -0.07, -0.05, -0.035, -0.025, -0.02)
MIN_GRID_POINTS = 4
BRACKET_ULPS = 4


class RegionVerdict(enum.Enum):
    CoveredByCondition1 = "CoveredByCondition1"
    CoveredByCondition2 = "CoveredByCondition2"
    Conjectured = "Conjectured"
    Invalid = "Invalid"


class Quantity(enum.Enum):
    lower = "lower"
    upper = "upper"
    cross = "cross"
    decomposition = "decomposition"
    second = "second"


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of log Q(a) = slope / a + intercept, compared with the predicted slope."""

    quantity: Quantity
    b: float
    x: float
    slope: float
    intercept: float
    target: float
    rms_residual: float
    log_ratio: float
    grid: Tuple[float, ...]

    @property
    def ratio(self) -> float:
        return self.slope / self.target if self.target != 0 else float("nan")


def _le_pi(value: float) -> bool:
    # a few ulps of slack, so that e.g. 1.2 * (pi/1.2) counts as pi; the b brackets stay exact
    return value <= np.pi + BRACKET_ULPS * np.spacing(np.pi)


def classify(b: float, x: float) -> RegionVerdict:
    """Which hypothesis, if any, of the e^{b pi x / a} law covers (b, x)."""
    if not (np.isfinite(b) and np.isfinite(x)) or b < MIN_EXPONENT or not (0 < x and _le_pi(x)):
        return RegionVerdict.Invalid
    if b <= 1.0 or b >= MIN_DECOMPOSITION_EXPONENT:
        return RegionVerdict.CoveredByCondition1
    # b in (1, 5/4), where bx <= pi already forces x < pi
    if _le_pi(b * x):
        return RegionVerdict.CoveredByCondition2
    return RegionVerdict.Conjectured


def target_slope(quantity: Quantity, b: float, x: float) -> float:
    if quantity == Quantity.cross:
        return np.pi**2
    if quantity == Quantity.second:
        return b * np.pi**2 + b * np.pi * (np.pi - x)
    return b * np.pi * x


def _log_quantity(quantity: Quantity, a: float, b: float, x: float) -> float:
    if quantity == Quantity.decomposition:
        return decomposition_upper(a, b, x).log
    bounds = F_bounds(a, b, x)
    if quantity == Quantity.lower:
        return bounds.log_lower
    if quantity == Quantity.upper:
        return bounds.log_upper
    if quantity == Quantity.cross:
        return bounds.terms["cross"].log
    return bounds.terms["T2"].log


def _check_grid(a_grid: Sequence[float]) -> Tuple[float, ...]:
    grid = tuple(sorted(float(a) for a in a_grid))
    if len(grid) < MIN_GRID_POINTS:
        raise DomainError(f"slope fits need at least {MIN_GRID_POINTS} grid points, got {len(grid)}")
    if any(not a < 0 for a in grid):
        raise DomainError(f"grid values must be negative, got {grid}")
    if len(set(grid)) != len(grid):
        raise DomainError(f"grid values must be distinct, got {grid}")
    return grid


def evaluate_grid(func: Callable[[float], float], grid: Sequence[float], threads: Optional[int] = None) -> Dict:
    """func over the grid, concurrently; results keyed by grid value."""
    threads = threads or worker_count()
    with ThreadPoolExecutor(max_workers=min(threads, len(grid))) as executor:
        values = list(executor.map(func, grid))
    return dict(zip(grid, values))


def fit_inverse_a(grid: Sequence[float], logs: Sequence[float]) -> Tuple[float, float, float]:
    """(slope, intercept, rms residual) of logs against 1/a"""
    inv_a = 1.0 / np.asarray(grid, dtype=float)
    logs = np.asarray(logs, dtype=float)
    fit = stats.linregress(inv_a, logs)
    residual = logs - (fit.slope * inv_a + fit.intercept)
    return float(fit.slope), float(fit.intercept), float(np.sqrt(np.mean(residual**2)))


def slope_fit(
    quantity: Quantity,
    b: float,
    x: float,
    a_grid: Sequence[float] = DEFAULT_GRID,
    threads: Optional[int] = None,
) -> SlopeFit:
    quantity = Quantity(quantity)
    grid = _check_grid(a_grid)
    logger.info(f"Fitting {quantity.value} for b={b}, x={x} over {grid}")

    values = evaluate_grid(lambda a: _log_quantity(quantity, a, b, x), grid, threads)
    logs = [values[a] for a in grid]
    slope, intercept, rms = fit_inverse_a(grid, logs)
    target = target_slope(quantity, b, x)

    nearest = grid[-1]
    log_ratio = logs[-1] / (target / nearest) if target != 0 else float("nan")
    if not np.isfinite(slope):
        logger.warning(f"Degenerate fit for {quantity.value} at b={b}, x={x}: {logs}")
    return SlopeFit(
        quantity=quantity,
        b=b,
        x=x,
        slope=slope,
        intercept=intercept,
        target=target,
        rms_residual=rms,
        log_ratio=log_ratio,
        grid=grid,
    )


def gap_report(
    b: float, x: float, a_grid: Sequence[float] = DEFAULT_GRID, threads: Optional[int] = None
) -> pd.DataFrame:
    """
    Per grid point: the bounds, their gap, and the headroom log(T1 + T2) - log(cross).  Rows with
    non-positive headroom are flagged: there the cross term is not small against the lower bound and
    the two bounds need not merge as a -> 0-.
    """
    grid = _check_grid(a_grid)
    bounds = evaluate_grid(lambda a: F_bounds(a, b, x), grid, threads)

    rows = []
    for a in grid:
        pair = bounds[a]
        headroom = signed_logsumexp([pair.terms["T1"], pair.terms["T2"]]).log - pair.terms["cross"].log
        rows.append(
            {
                "a": a,
                "log_lower": pair.log_lower,
                "log_upper": pair.log_upper,
                "gap": pair.gap,
                "gap/|log_lower|": pair.gap / abs(pair.log_lower) if pair.log_lower != 0 else math.inf,
                "headroom": headroom,
                "flagged": bool(headroom <= 0),
            }
        )
    report = pd.DataFrame(rows)
    flagged = int(report["flagged"].sum())
    if flagged:
        logger.info(f"{flagged} of {len(grid)} grid points have no cross-term headroom at b={b}, x={x}")
    return report
