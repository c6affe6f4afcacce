import numpy as np

from ensemble_cma.archive import EvaluationArchive
from ensemble_cma.benchmarks.problem import Problem
from ensemble_cma.estimators.strategy import (
    EstimateResult,
    EstimationStrategy,
    EstimatorConfig,
    check_ensemble_size,
    record,
    simulate,
)
from ensemble_cma.optimizer import DesignPoint, OptimizerState


def estimate_one_realization(
    point: DesignPoint,
    problem: Problem,
    archive: EvaluationArchive,
    config: EstimatorConfig,
    rng: np.random.Generator,
    generation: int = 0,
) -> EstimateResult:
    check_ensemble_size(problem, config)
    realization_ids = (int(rng.integers(1, config.n_realizations + 1)),)
    values = simulate(point, problem, realization_ids)
    record(archive, point, realization_ids, values, generation)
    return EstimateResult(
        estimate=float(values[0]),
        fresh_simulations=1,
        realization_ids=realization_ids,
    )


class OneRealization(EstimationStrategy):
    @classmethod
    def name(cls) -> str:
        return "One Realization"

    def estimate(
        self,
        point: DesignPoint,
        problem: Problem,
        archive: EvaluationArchive,
        optimizer_state: OptimizerState,
        rng: np.random.Generator,
        generation: int,
    ) -> EstimateResult:
        return estimate_one_realization(
            point, problem, archive, self.config, rng, generation
        )


EstimationStrategy.register(OneRealization)
