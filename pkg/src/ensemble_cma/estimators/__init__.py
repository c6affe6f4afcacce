from ensemble_cma.estimators.mean_of_samples import (
    MeanOfSamples,
    estimate_mean_of_samples,
)
from ensemble_cma.estimators.neighborhood import Neighborhood, estimate_neighborhood
from ensemble_cma.estimators.one_realization import (
    OneRealization,
    estimate_one_realization,
)
from ensemble_cma.estimators.strategy import (
    EstimateResult,
    EstimationStrategy,
    EstimatorConfig,
)

__all__ = [
    "EstimateResult",
    "EstimationStrategy",
    "EstimatorConfig",
    "MeanOfSamples",
    "Neighborhood",
    "OneRealization",
    "estimate_mean_of_samples",
    "estimate_neighborhood",
    "estimate_one_realization",
]
