from __future__ import annotations

import abc
import math
import logging
from typing import Any, Optional

import numpy as np

from ensemble_cma import BASE_LOGGER
from ensemble_cma.optimizer import DesignPoint, as_design_point


class SimulationError(RuntimeError):
    pass


class Problem(abc.ABC):
    """A multi-realization objective: one value per (point, realization).

    Points outside the bounding box are simulated at their projection onto
    the box and penalized by -penalty_factor * ||x - proj(x)||^2.
    """

    BASE_LOGGER = BASE_LOGGER.getChild("problem")

    def __init__(
        self,
        dimension: int,
        n_realizations: int,
        seed: int,
        bounds: Optional[np.ndarray] = None,
        penalty_factor: float = 0.0,
    ) -> None:
        if dimension < 1:
            raise ValueError(f"Dimension must be positive, got {dimension}.")
        if n_realizations < 1:
            raise ValueError(
                f"Need at least one realization, got {n_realizations}."
            )
        if bounds is not None:
            bounds = np.asarray(bounds, dtype=float)
            if bounds.shape != (dimension, 2) or np.any(bounds[:, 0] > bounds[:, 1]):
                raise ValueError(f"Invalid bounds of shape {bounds.shape}.")
        self.dimension = dimension
        self.n_realizations = n_realizations
        self.seed = seed
        self.bounds = bounds
        self.penalty_factor = penalty_factor
        self._logger: logging.Logger = self.BASE_LOGGER.getChild(self.name())

    @classmethod
    @abc.abstractmethod
    def name(cls) -> str:
        pass

    @abc.abstractmethod
    def _simulate(self, coords: np.ndarray, realization_id: int) -> float:
        pass

    @abc.abstractmethod
    def parameters(self) -> dict[str, Any]:
        pass

    @abc.abstractmethod
    def default_start(self) -> tuple[np.ndarray, float]:
        pass

    def descriptor(self) -> dict[str, Any]:
        return {
            "problem": self.name(),
            "problem_seed": self.seed,
            "dimension": self.dimension,
            "n_realizations": self.n_realizations,
            **self.parameters(),
        }

    def project(self, point: DesignPoint) -> np.ndarray:
        if self.bounds is None:
            return point
        return np.clip(point, self.bounds[:, 0], self.bounds[:, 1])

    def penalty(self, point: DesignPoint) -> float:
        if self.bounds is None or self.penalty_factor == 0:
            return 0.0
        excess = point - self.project(point)
        # fsum keeps the result independent of coordinate order.
        return self.penalty_factor * math.fsum(excess * excess)

    def evaluate(self, point: DesignPoint, realization_id: int) -> float:
        if not 1 <= realization_id <= self.n_realizations:
            raise ValueError(
                f"Realization id {realization_id} outside"
                f" [1, {self.n_realizations}]."
            )
        point = as_design_point(point, self.dimension)
        try:
            value = self._simulate(self.project(point), realization_id)
        except Exception as e:
            raise SimulationError(
                f"{self.name()} failed on realization {realization_id}"
                f" at {point.tolist()}: {e}"
            ) from e
        if not math.isfinite(value):
            raise SimulationError(
                f"{self.name()} returned {value} on realization"
                f" {realization_id} at {point.tolist()}."
            )
        return value - self.penalty(point)

    def ensemble_values(self, point: DesignPoint) -> list[float]:
        return [
            self.evaluate(point, realization_id)
            for realization_id in range(1, self.n_realizations + 1)
        ]
