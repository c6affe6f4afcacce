"""Run configuration: one flat key-value mapping split across three
dataclasses (problem, estimator, run) whose field names never collide."""

from __future__ import annotations

import dataclasses
import pathlib
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import yaml

from ensemble_cma import ConfigError
from ensemble_cma.benchmarks import PROBLEMS, Problem, make_problem
from ensemble_cma.estimators import EstimationStrategy, EstimatorConfig

VERIFICATION_POLICIES = ("on_new_best", "every_generation")


@dataclass
class ProblemConfig:
    problem: str = "shifted_sphere"
    problem_seed: int = 0
    dimension: int = 12
    shift_scale: float = 1.0
    log_std: Optional[float] = None
    correlation_cells: Optional[float] = None

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(
                f"Unknown problem {self.problem!r}; known: {sorted(PROBLEMS)}."
            )
        if self.dimension < 1:
            raise ConfigError(f"dimension must be positive, got {self.dimension}.")
        if self.problem == "npv_proxy" and self.dimension not in (4, 12):
            raise ConfigError(
                f"npv_proxy supports dimension 4 or 12, got {self.dimension}."
            )
        if self.shift_scale < 0:
            raise ConfigError(
                f"shift_scale must be non-negative, got {self.shift_scale}."
            )

    def build(self, n_realizations: int) -> Problem:
        return make_problem(
            self.problem,
            dimension=self.dimension,
            n_realizations=n_realizations,
            seed=self.problem_seed,
            shift_scale=self.shift_scale,
            log_std=self.log_std,
            correlation_cells=self.correlation_cells,
        )


@dataclass
class RunConfig:
    strategy: str = "neighborhood"
    label: Optional[str] = None
    population_size: int = 40
    initial_mean: Optional[list[float]] = None
    initial_step_size: Optional[float] = None
    budget_simulations: int = 20000
    n_runs: int = 1
    master_seed: int = 0
    verification: str = "on_new_best"
    problem_settings: ProblemConfig = field(default_factory=ProblemConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)

    def __post_init__(self) -> None:
        if isinstance(self.problem_settings, dict):
            self.problem_settings = ProblemConfig(**self.problem_settings)
        if isinstance(self.estimator, dict):
            self.estimator = EstimatorConfig(**self.estimator)

        EstimationStrategy.get_strategy_by_name(self.strategy)
        if self.population_size < 2:
            raise ConfigError(
                f"population_size must be at least 2, got {self.population_size}."
            )
        if self.initial_mean is not None:
            self.initial_mean = [float(x) for x in self.initial_mean]
            if len(self.initial_mean) != self.problem_settings.dimension:
                raise ConfigError(
                    f"initial_mean has {len(self.initial_mean)} coordinates,"
                    f" dimension is {self.problem_settings.dimension}."
                )
            if not np.all(np.isfinite(self.initial_mean)):
                raise ConfigError(f"initial_mean must be finite: {self.initial_mean}.")
        if self.initial_step_size is not None and not self.initial_step_size > 0:
            raise ConfigError(
                f"initial_step_size must be positive, got {self.initial_step_size}."
            )
        if self.budget_simulations < self.estimator.n_realizations:
            raise ConfigError(
                f"budget_simulations ({self.budget_simulations}) must afford one"
                f" verification ({self.estimator.n_realizations} simulations)."
            )
        if self.n_runs < 1:
            raise ConfigError(f"n_runs must be positive, got {self.n_runs}.")
        if self.verification not in VERIFICATION_POLICIES:
            raise ConfigError(
                f"Unknown verification policy {self.verification!r};"
                f" known: {VERIFICATION_POLICIES}."
            )

    @property
    def run_label(self) -> str:
        return self.label if self.label is not None else self.strategy

    @classmethod
    def from_mapping(cls, mapping: dict[str, Any]) -> RunConfig:
        run_keys = _field_names(cls) - {"problem_settings", "estimator"}
        problem_keys = _field_names(ProblemConfig)
        estimator_keys = _field_names(EstimatorConfig)
        unknown = set(mapping) - run_keys - problem_keys - estimator_keys
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}.")

        try:
            return cls(
                problem_settings=ProblemConfig(
                    **{k: v for k, v in mapping.items() if k in problem_keys}
                ),
                estimator=EstimatorConfig(
                    **{k: v for k, v in mapping.items() if k in estimator_keys}
                ),
                **{k: v for k, v in mapping.items() if k in run_keys},
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration value: {e}") from e

    def to_mapping(self) -> dict[str, Any]:
        """The resolved flat mapping; from_mapping(to_mapping()) round-trips."""
        mapping = {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.name not in ("problem_settings", "estimator")
        }
        mapping.update(dataclasses.asdict(self.problem_settings))
        mapping.update(dataclasses.asdict(self.estimator))
        return mapping


def _field_names(cls: type) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def load_config(path: pathlib.Path) -> dict[str, Any]:
    try:
        with open(path) as f:
            mapping = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e

    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ConfigError(
            f"Config file {path} must hold a key-value mapping, got"
            f" {type(mapping).__name__}."
        )
    return mapping
