"""Ensemble aggregation formulas turning per-realization values into one
objective value."""

from typing import Sequence

import numpy as np


def _as_values(values: Sequence[float] | np.ndarray, minimum: int = 1) -> np.ndarray:
    array = np.asarray(values, dtype=float)
    if array.ndim != 1 or len(array) < minimum:
        raise ValueError(
            f"Need at least {minimum} value(s) to aggregate, got {len(array)}."
        )
    if not np.all(np.isfinite(array)):
        raise ValueError(f"Values must be finite, got {array}.")
    return array


def aggregate_mean(values: Sequence[float] | np.ndarray) -> float:
    return float(np.mean(_as_values(values)))


def aggregate_risk(values: Sequence[float] | np.ndarray, r: float) -> float:
    """Mean plus r times the population standard deviation (divisor N).

    r > 0 is risk-prone, r < 0 risk-averse.
    """
    array = _as_values(values)
    return aggregate_mean(array) + r * float(np.std(array, ddof=0))


def aggregate_percentile(
    values: Sequence[float] | np.ndarray, r_10: float, r_50: float, r_90: float
) -> float:
    """Weighted sum of the 10th, 50th and 90th empirical percentiles.

    Quantiles interpolate linearly between order statistics at the
    1-based position 1 + p * (N - 1).
    """
    array = _as_values(values, minimum=2)
    q_10, q_50, q_90 = np.quantile(array, [0.1, 0.5, 0.9], method="linear")
    return float(r_10 * q_10 + r_50 * q_50 + r_90 * q_90)


def neighbor_weight(distance: float | np.ndarray, d_max: float) -> np.ndarray:
    """(1 - (d / d_max)^2)^2: 1 at the query, 0 at the selection boundary."""
    ratio = np.asarray(distance, dtype=float) / d_max
    return np.clip(1 - ratio**2, 0.0, None) ** 2


def weighted_mean_and_std(
    values: np.ndarray, weights: np.ndarray
) -> tuple[float, float]:
    """Weighted mean and weighted population standard deviation, both
    normalized by the weight total."""
    if np.all(values == values[0]):
        return float(values[0]), 0.0
    total = float(np.sum(weights))
    mean = float(np.dot(weights, values)) / total
    variance = float(np.dot(weights, (values - mean) ** 2)) / total
    return mean, float(np.sqrt(max(variance, 0.0)))
