"""Neighborhood estimation: a few fresh simulations completed by archived
simulations of nearby points.

Until the archive holds bootstrap_threshold simulations, a point's estimate
is the mean of bootstrap_samples fresh values. After that, main_samples fresh
values (weight 1) are combined with the archived neighbors within
selection_distance under the optimizer's Mahalanobis metric, each weighted
by (1 - (d / d_max)^2)^2.
"""

import numpy as np

from ensemble_cma.archive import EvaluationArchive
from ensemble_cma.benchmarks.problem import Problem
from ensemble_cma.estimators.aggregators import neighbor_weight, weighted_mean_and_std
from ensemble_cma.estimators.strategy import (
    EstimateResult,
    EstimationStrategy,
    EstimatorConfig,
    check_ensemble_size,
    record,
    simulate,
)
from ensemble_cma.optimizer import DesignPoint, OptimizerState, distance_function


def _draw_realizations(
    rng: np.random.Generator, n_realizations: int, count: int
) -> tuple[int, ...]:
    drawn = rng.choice(n_realizations, size=count, replace=False) + 1
    return tuple(int(i) for i in drawn)


def estimate_neighborhood(
    point: DesignPoint,
    problem: Problem,
    archive: EvaluationArchive,
    config: EstimatorConfig,
    optimizer_state: OptimizerState,
    rng: np.random.Generator,
    generation: int = 0,
) -> EstimateResult:
    check_ensemble_size(problem, config)

    if archive.count_simulations() < config.bootstrap_threshold:
        realization_ids = _draw_realizations(
            rng, config.n_realizations, config.bootstrap_samples
        )
        values = simulate(point, problem, realization_ids)
        record(archive, point, realization_ids, values, generation)
        return EstimateResult(
            estimate=float(np.mean(values)),
            fresh_simulations=len(realization_ids),
            realization_ids=realization_ids,
        )

    realization_ids = _draw_realizations(rng, config.n_realizations, config.main_samples)
    fresh = simulate(point, problem, realization_ids)
    neighbors = archive.nearest_within(
        point,
        distance_function(optimizer_state, config.distance_scaling),
        config.selection_distance,
        config.max_neighbors,
    )
    values = np.concatenate([fresh, neighbors.values])
    weights = np.concatenate(
        [
            np.ones(len(fresh)),
            neighbor_weight(neighbors.distances, config.selection_distance),
        ]
    )
    mean, std = weighted_mean_and_std(values, weights)
    # Fresh records become visible only after the estimate is computed.
    record(archive, point, realization_ids, fresh, generation)

    if config.use_std_term:
        return EstimateResult(
            estimate=mean + config.risk_factor * std,
            fresh_simulations=len(realization_ids),
            neighbors_used=len(neighbors),
            std_estimate=std,
            realization_ids=realization_ids,
        )
    return EstimateResult(
        estimate=mean,
        fresh_simulations=len(realization_ids),
        neighbors_used=len(neighbors),
        realization_ids=realization_ids,
    )


class Neighborhood(EstimationStrategy):
    @classmethod
    def name(cls) -> str:
        return "Neighborhood"

    def estimate(
        self,
        point: DesignPoint,
        problem: Problem,
        archive: EvaluationArchive,
        optimizer_state: OptimizerState,
        rng: np.random.Generator,
        generation: int,
    ) -> EstimateResult:
        if archive.count_simulations() < self.config.bootstrap_threshold:
            self._logger.debug(
                f"Bootstrap phase: archive holds {archive.count_simulations()}"
                f" of {self.config.bootstrap_threshold} simulations"
            )
        return estimate_neighborhood(
            point, problem, archive, self.config, optimizer_state, rng, generation
        )


EstimationStrategy.register(Neighborhood)
