from __future__ import annotations

import abc
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ensemble_cma import BASE_LOGGER, ConfigError
from ensemble_cma.archive import EvaluationArchive, EvaluationRecord
from ensemble_cma.benchmarks.problem import Problem
from ensemble_cma.optimizer import DesignPoint, OptimizerState

AGGREGATORS = ("mean", "risk", "percentile")
DISTANCE_SCALINGS = ("C", "sigma2C")


@dataclass
class EstimatorConfig:
    n_realizations: int = 20
    bootstrap_threshold: int = 40
    bootstrap_samples: int = 1
    main_samples: int = 1
    max_neighbors: int = 40
    selection_distance: float = 4000.0
    risk_factor: float = 0.0
    percentile_weights: tuple[float, float, float] = (0.0, 1.0, 0.0)
    use_std_term: bool = False
    aggregator: str = "mean"
    distance_scaling: str = "C"
    intra_generation_visibility: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.percentile_weights, list):
            self.percentile_weights = tuple(self.percentile_weights)
        if isinstance(self.intra_generation_visibility, str):
            if self.intra_generation_visibility not in ("on", "off"):
                raise ConfigError(
                    "intra_generation_visibility must be on or off, got"
                    f" {self.intra_generation_visibility!r}."
                )
            self.intra_generation_visibility = (
                self.intra_generation_visibility == "on"
            )
        self.selection_distance = float(self.selection_distance)
        self.risk_factor = float(self.risk_factor)

        if self.n_realizations < 1:
            raise ConfigError(
                f"n_realizations must be positive, got {self.n_realizations}."
            )
        if self.bootstrap_threshold < 1:
            raise ConfigError(
                "bootstrap_threshold must be positive, got"
                f" {self.bootstrap_threshold}."
            )
        for name in ("bootstrap_samples", "main_samples"):
            value = getattr(self, name)
            if not 1 <= value <= self.n_realizations:
                raise ConfigError(
                    f"{name} must lie in [1, {self.n_realizations}], got {value}."
                )
        if self.max_neighbors < 1:
            raise ConfigError(
                f"max_neighbors must be at least 1, got {self.max_neighbors}."
            )
        if not self.selection_distance > 0:
            raise ConfigError(
                "selection_distance must be positive, got"
                f" {self.selection_distance}."
            )
        if len(self.percentile_weights) != 3:
            raise ConfigError(
                "percentile_weights needs (r_10, r_50, r_90), got"
                f" {self.percentile_weights}."
            )
        r_10, r_50, r_90 = self.percentile_weights
        self.percentile_weights = (float(r_10), float(r_50), float(r_90))
        if self.aggregator not in AGGREGATORS:
            raise ConfigError(
                f"Unknown aggregator {self.aggregator!r}; known: {AGGREGATORS}."
            )
        if self.aggregator == "percentile" and self.n_realizations < 2:
            raise ConfigError("The percentile aggregator needs n_realizations >= 2.")
        if self.distance_scaling not in DISTANCE_SCALINGS:
            raise ConfigError(
                f"Unknown distance scaling {self.distance_scaling!r};"
                f" known: {DISTANCE_SCALINGS}."
            )


@dataclass(frozen=True)
class EstimateResult:
    estimate: float
    fresh_simulations: int
    neighbors_used: int = 0
    std_estimate: Optional[float] = None
    realization_ids: tuple[int, ...] = field(default_factory=tuple)


class EstimationStrategy(abc.ABC):
    """Maps a candidate point to an estimated objective value.

    Strategies register their class once, at import time; instances are
    created per run with that run's EstimatorConfig.
    """

    BASE_LOGGER = BASE_LOGGER.getChild("estimators")
    _strategies: list[type[EstimationStrategy]] = []

    def __init__(self, config: EstimatorConfig) -> None:
        self.config = config
        self._logger: logging.Logger = self.BASE_LOGGER.getChild(
            self.canonical_name()
        )

    @classmethod
    @abc.abstractmethod
    def name(cls) -> str:
        pass

    @classmethod
    def canonical_name(cls) -> str:
        return cls.name().replace(" ", "_").lower()

    @abc.abstractmethod
    def estimate(
        self,
        point: DesignPoint,
        problem: Problem,
        archive: EvaluationArchive,
        optimizer_state: OptimizerState,
        rng: np.random.Generator,
        generation: int,
    ) -> EstimateResult:
        pass

    @classmethod
    def register(cls, strategy_cls: type[EstimationStrategy]) -> None:
        if strategy_cls.canonical_name() in [
            s.canonical_name() for s in cls._strategies
        ]:
            raise ValueError(
                f"Strategy with name {strategy_cls.canonical_name()} already"
                " registered."
            )
        cls._strategies.append(strategy_cls)

    @classmethod
    def get_all_strategies(cls) -> list[type[EstimationStrategy]]:
        return list(cls._strategies)

    @classmethod
    def get_strategy_by_name(cls, name: str) -> type[EstimationStrategy]:
        for strategy_cls in cls._strategies:
            if strategy_cls.canonical_name() == name:
                return strategy_cls
        raise ConfigError(
            f"Unknown strategy {name!r}; known:"
            f" {[s.canonical_name() for s in cls._strategies]}."
        )


def check_ensemble_size(problem: Problem, config: EstimatorConfig) -> None:
    if problem.n_realizations != config.n_realizations:
        raise ValueError(
            f"Problem has {problem.n_realizations} realizations, estimator is"
            f" configured for {config.n_realizations}."
        )


def simulate(
    point: DesignPoint, problem: Problem, realization_ids: Sequence[int]
) -> np.ndarray:
    return np.array(
        [problem.evaluate(point, realization_id) for realization_id in realization_ids],
        dtype=float,
    )


def record(
    archive: EvaluationArchive,
    point: DesignPoint,
    realization_ids: Sequence[int],
    values: np.ndarray,
    generation: int,
) -> None:
    for realization_id, value in zip(realization_ids, values):
        archive.insert(
            EvaluationRecord(
                point=np.array(point, dtype=float),
                realization_id=int(realization_id),
                value=float(value),
                generation=generation,
            )
        )
