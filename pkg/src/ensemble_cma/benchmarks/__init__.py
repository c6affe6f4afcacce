from typing import Optional

from ensemble_cma.benchmarks.npv_proxy import NpvProxy
from ensemble_cma.benchmarks.problem import Problem, SimulationError
from ensemble_cma.benchmarks.shifted_sphere import ShiftedSphere, make_shifted_sphere

PROBLEMS: dict[str, type[Problem]] = {
    ShiftedSphere.name(): ShiftedSphere,
    NpvProxy.name(): NpvProxy,
}


def make_problem(
    name: str,
    *,
    dimension: int,
    n_realizations: int,
    seed: int,
    shift_scale: float = 1.0,
    log_std: Optional[float] = None,
    correlation_cells: Optional[float] = None,
) -> Problem:
    if name == ShiftedSphere.name():
        return make_shifted_sphere(dimension, n_realizations, shift_scale, seed)
    if name == NpvProxy.name():
        return NpvProxy(
            dimension,
            n_realizations,
            seed,
            log_std=log_std,
            correlation_cells=correlation_cells,
        )
    raise ValueError(f"Unknown problem {name!r}; known: {sorted(PROBLEMS)}.")


__all__ = [
    "NpvProxy",
    "Problem",
    "ShiftedSphere",
    "SimulationError",
    "make_problem",
    "make_shifted_sphere",
]
