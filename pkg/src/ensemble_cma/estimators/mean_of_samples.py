import numpy as np

from ensemble_cma.archive import EvaluationArchive
from ensemble_cma.benchmarks.problem import Problem
from ensemble_cma.estimators.aggregators import (
    aggregate_mean,
    aggregate_percentile,
    aggregate_risk,
)
from ensemble_cma.estimators.strategy import (
    EstimateResult,
    EstimationStrategy,
    EstimatorConfig,
    check_ensemble_size,
    record,
    simulate,
)
from ensemble_cma.optimizer import DesignPoint, OptimizerState


def aggregate(values: np.ndarray, config: EstimatorConfig) -> float:
    if config.aggregator == "risk":
        return aggregate_risk(values, config.risk_factor)
    if config.aggregator == "percentile":
        return aggregate_percentile(values, *config.percentile_weights)
    return aggregate_mean(values)


def estimate_mean_of_samples(
    point: DesignPoint,
    problem: Problem,
    archive: EvaluationArchive,
    config: EstimatorConfig,
    generation: int = 0,
) -> EstimateResult:
    """Simulate every realization and aggregate the ensemble."""
    check_ensemble_size(problem, config)
    realization_ids = tuple(range(1, config.n_realizations + 1))
    values = simulate(point, problem, realization_ids)
    estimate = aggregate(values, config)
    record(archive, point, realization_ids, values, generation)
    return EstimateResult(
        estimate=estimate,
        fresh_simulations=len(realization_ids),
        realization_ids=realization_ids,
    )


class MeanOfSamples(EstimationStrategy):
    @classmethod
    def name(cls) -> str:
        return "Mean Of Samples"

    def estimate(
        self,
        point: DesignPoint,
        problem: Problem,
        archive: EvaluationArchive,
        optimizer_state: OptimizerState,
        rng: np.random.Generator,
        generation: int,
    ) -> EstimateResult:
        return estimate_mean_of_samples(point, problem, archive, self.config, generation)


EstimationStrategy.register(MeanOfSamples)
