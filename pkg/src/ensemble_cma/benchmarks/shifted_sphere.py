from typing import Any

import numpy as np

from ensemble_cma.benchmarks.problem import Problem


class ShiftedSphere(Problem):
    """Realization i is -||x - o_i||^2 with shifts drawn uniformly in
    [-shift_scale, shift_scale]^n.

    The ensemble mean is -||x - o_bar||^2 - V_bar, where o_bar is the shift
    centroid and V_bar the mean squared spread of the shifts, so the
    ensemble optimum is o_bar with value -V_bar.
    """

    def __init__(
        self, dimension: int, n_realizations: int, shift_scale: float, seed: int
    ) -> None:
        super().__init__(dimension, n_realizations, seed)
        if shift_scale < 0:
            raise ValueError(f"Shift scale must be non-negative, got {shift_scale}.")
        self.shift_scale = shift_scale
        self.shifts = np.random.default_rng(seed).uniform(
            -shift_scale, shift_scale, size=(n_realizations, dimension)
        )

    @classmethod
    def name(cls) -> str:
        return "shifted_sphere"

    def parameters(self) -> dict[str, Any]:
        return {"shift_scale": self.shift_scale}

    def default_start(self) -> tuple[np.ndarray, float]:
        return np.full(self.dimension, 3.0), 2.0

    @property
    def ensemble_optimum(self) -> np.ndarray:
        return self.shifts.mean(axis=0)

    @property
    def ensemble_spread(self) -> float:
        deviations = self.shifts - self.ensemble_optimum
        return float(np.mean(np.sum(deviations**2, axis=1)))

    def ensemble_mean(self, point: np.ndarray) -> float:
        """Closed form of the mean over all realizations."""
        offset = np.asarray(point, dtype=float) - self.ensemble_optimum
        return -float(np.dot(offset, offset)) - self.ensemble_spread

    def _simulate(self, coords: np.ndarray, realization_id: int) -> float:
        offset = coords - self.shifts[realization_id - 1]
        return -float(np.dot(offset, offset))


def make_shifted_sphere(
    n: int, n_realizations: int, shift_scale: float, seed: int
) -> ShiftedSphere:
    return ShiftedSphere(n, n_realizations, shift_scale, seed)
