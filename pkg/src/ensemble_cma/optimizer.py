"""Generation-based CMA-ES with an ask/tell interface.

The update cycle is the standard (mu/mu_w, lambda)-CMA-ES: weighted
recombination of the mu = lambda // 2 best points, cumulative step-size
adaptation, and rank-one plus rank-mu covariance updates. Default strategy
constants are functions of the dimension n and the population size lambda:

    w_i'    = ln((lambda + 1) / 2) - ln(i),            i = 1..mu
    w_i     = w_i' / sum(w')
    mu_eff  = 1 / sum(w_i ** 2)
    c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
    d_sigma = 1 + 2 * max(0, sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma
    c_c     = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
    c_1     = 2 / ((n + 1.3) ** 2 + mu_eff)
    c_mu    = min(1 - c_1, 2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff))
    chi_n   = sqrt(n) * (1 - 1 / (4 n) + 1 / (21 n^2))

The eigendecomposition C = B diag(D^2) B^T is refreshed after every update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import yaml

from ensemble_cma import BASE_LOGGER

MIN_STEP_SIZE = 1e-300
EIGENVALUE_FLOOR = 1e-20
MAX_CONDITION_NUMBER = 1e14

DistanceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

_logger = BASE_LOGGER.getChild("optimizer")


class OptimizerError(RuntimeError):
    pass


class IllConditionedCovarianceError(OptimizerError):
    pass


DesignPoint = np.ndarray


def as_design_point(coords: Sequence[float] | np.ndarray, dimension: int) -> DesignPoint:
    point = np.asarray(coords, dtype=float)
    if point.shape != (dimension,):
        raise ValueError(
            f"Expected a point of dimension {dimension}, got shape {point.shape}."
        )
    if not np.all(np.isfinite(point)):
        raise ValueError(f"Point has non-finite coordinates: {point}.")
    return point


@dataclass
class StrategyParameters:
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float

    @classmethod
    def defaults(cls, n: int, population_size: int) -> StrategyParameters:
        mu = population_size // 2
        raw_weights = np.log((population_size + 1) / 2) - np.log(
            np.arange(1, mu + 1)
        )
        weights = raw_weights / raw_weights.sum()
        mu_eff = float(1.0 / np.sum(weights**2))

        c_sigma = (mu_eff + 2) / (n + mu_eff + 5)
        d_sigma = (
            1 + 2 * max(0.0, math.sqrt((mu_eff - 1) / (n + 1)) - 1) + c_sigma
        )
        c_c = (4 + mu_eff / n) / (n + 4 + 2 * mu_eff / n)
        c_1 = 2 / ((n + 1.3) ** 2 + mu_eff)
        c_mu = min(
            1 - c_1,
            2 * (mu_eff - 2 + 1 / mu_eff) / ((n + 2) ** 2 + mu_eff),
        )
        chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        return cls(
            mu=mu,
            weights=weights,
            mu_eff=mu_eff,
            c_sigma=c_sigma,
            d_sigma=d_sigma,
            c_c=c_c,
            c_1=c_1,
            c_mu=c_mu,
            chi_n=chi_n,
        )


@dataclass
class OptimizerState:
    dimension: int
    population_size: int
    seed: int
    mean: np.ndarray
    sigma: float
    covariance: np.ndarray
    path_sigma: np.ndarray
    path_c: np.ndarray
    generation: int
    parameters: StrategyParameters
    # Maintained eigendecomposition: covariance = B @ diag(D**2) @ B.T
    eigenbasis: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    axis_lengths: np.ndarray = field(default_factory=lambda: np.empty(0))

    def generation_rng(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.generation,))
        )

    def condition_number(self) -> float:
        eigenvalues = self.axis_lengths**2
        return float(eigenvalues.max() / eigenvalues.min())

    def to_yaml(self) -> str:
        """Serialize every field at full precision (floats are written
        with their shortest round-tripping repr)."""
        p = self.parameters
        document: dict[str, Any] = {
            "format": "ensemble-cma-optimizer-state",
            "version": 1,
            "dimension": self.dimension,
            "population_size": self.population_size,
            "seed": self.seed,
            "generation": self.generation,
            "sigma": float(self.sigma),
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "path_sigma": self.path_sigma.tolist(),
            "path_c": self.path_c.tolist(),
            "eigenbasis": self.eigenbasis.tolist(),
            "axis_lengths": self.axis_lengths.tolist(),
            "parameters": {
                "mu": p.mu,
                "weights": p.weights.tolist(),
                "mu_eff": p.mu_eff,
                "c_sigma": p.c_sigma,
                "d_sigma": p.d_sigma,
                "c_c": p.c_c,
                "c_1": p.c_1,
                "c_mu": p.c_mu,
                "chi_n": p.chi_n,
            },
        }
        return yaml.safe_dump(document, sort_keys=False)

    @classmethod
    def from_yaml(cls, text: str) -> OptimizerState:
        document = yaml.safe_load(text)
        if document.get("format") != "ensemble-cma-optimizer-state":
            raise ValueError("Not an optimizer checkpoint.")
        params = dict(document["parameters"])
        params["weights"] = np.asarray(params["weights"], dtype=float)
        return cls(
            dimension=int(document["dimension"]),
            population_size=int(document["population_size"]),
            seed=int(document["seed"]),
            mean=np.asarray(document["mean"], dtype=float),
            sigma=float(document["sigma"]),
            covariance=np.asarray(document["covariance"], dtype=float),
            path_sigma=np.asarray(document["path_sigma"], dtype=float),
            path_c=np.asarray(document["path_c"], dtype=float),
            generation=int(document["generation"]),
            parameters=StrategyParameters(**params),
            eigenbasis=np.asarray(document["eigenbasis"], dtype=float),
            axis_lengths=np.asarray(document["axis_lengths"], dtype=float),
        )


def update_eigensystem(state: OptimizerState) -> None:
    # Exact symmetry: mirror the upper triangle.
    state.covariance = np.triu(state.covariance) + np.triu(state.covariance, 1).T
    try:
        eigenvalues, eigenbasis = np.linalg.eigh(state.covariance)
    except np.linalg.LinAlgError as e:
        raise OptimizerError(
            f"Eigendecomposition of the covariance did not converge at"
            f" generation {state.generation}."
        ) from e
    if not np.all(np.isfinite(eigenvalues)) or eigenvalues.max() <= 0:
        raise OptimizerError(
            f"Degenerate covariance at generation {state.generation}:"
            f" eigenvalues {eigenvalues}."
        )
    floor = EIGENVALUE_FLOOR * eigenvalues.max()
    state.eigenbasis = eigenbasis
    state.axis_lengths = np.sqrt(np.maximum(eigenvalues, floor))


def init_optimizer(
    n: int,
    m0: Sequence[float] | np.ndarray,
    sigma0: float,
    population_size: int,
    seed: int,
) -> OptimizerState:
    if n < 1:
        raise ValueError(f"Dimension must be at least 1, got {n}.")
    if not sigma0 > 0 or not math.isfinite(sigma0):
        raise ValueError(f"Initial step size must be positive, got {sigma0}.")
    if population_size < 2:
        raise ValueError(
            f"Population size must be at least 2, got {population_size}."
        )
    mean = as_design_point(m0, n)

    state = OptimizerState(
        dimension=n,
        population_size=population_size,
        seed=seed,
        mean=mean.copy(),
        sigma=max(float(sigma0), MIN_STEP_SIZE),
        covariance=np.eye(n),
        path_sigma=np.zeros(n),
        path_c=np.zeros(n),
        generation=0,
        parameters=StrategyParameters.defaults(n, population_size),
    )
    update_eigensystem(state)
    _logger.debug(
        f"Initialized CMA-ES: {n=}, {population_size=}, sigma0={state.sigma}"
    )
    return state


def ask(state: OptimizerState) -> list[DesignPoint]:
    """Sample lambda points x_i = m + sigma * B * D * z_i."""
    if not np.all(np.isfinite(state.axis_lengths)):
        raise OptimizerError("Covariance eigensystem is not finite.")
    z = state.generation_rng().standard_normal(
        (state.population_size, state.dimension)
    )
    steps = (z * state.axis_lengths) @ state.eigenbasis.T
    return [state.mean + state.sigma * step for step in steps]


def _ranking(fitnesses: np.ndarray, maximize: bool) -> np.ndarray:
    keys = -fitnesses if maximize else fitnesses
    # Stable: ties keep sampling order.
    return np.argsort(keys, kind="stable")


def tell(
    state: OptimizerState,
    points: Sequence[DesignPoint],
    fitnesses: Sequence[float],
    maximize: bool = True,
) -> OptimizerState:
    if len(points) != state.population_size or len(fitnesses) != len(points):
        raise ValueError(
            f"Expected {state.population_size} points and fitnesses, got"
            f" {len(points)} points and {len(fitnesses)} fitnesses."
        )
    values = np.asarray(fitnesses, dtype=float)
    if np.any(np.isnan(values)):
        raise ValueError("Fitness values must not be NaN.")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"Fitness values must be finite, got {values}.")

    p = state.parameters
    n = state.dimension
    population = np.asarray(points, dtype=float)
    if population.shape != (state.population_size, n):
        raise ValueError(
            f"Expected points of dimension {n}, got array of shape"
            f" {population.shape}."
        )
    selected = population[_ranking(values, maximize)[: p.mu]]

    old_mean = state.mean
    new_mean = p.weights @ selected
    mean_step = (new_mean - old_mean) / state.sigma

    inv_sqrt_c = (state.eigenbasis / state.axis_lengths) @ state.eigenbasis.T
    state.path_sigma = (1 - p.c_sigma) * state.path_sigma + math.sqrt(
        p.c_sigma * (2 - p.c_sigma) * p.mu_eff
    ) * (inv_sqrt_c @ mean_step)

    norm_path_sigma = float(np.linalg.norm(state.path_sigma))
    expected_norm = (
        math.sqrt(1 - (1 - p.c_sigma) ** (2 * (state.generation + 1))) * p.chi_n
    )
    h_sigma = 1.0 if norm_path_sigma / expected_norm < 1.4 + 2 / (n + 1) else 0.0

    state.path_c = (1 - p.c_c) * state.path_c + h_sigma * math.sqrt(
        p.c_c * (2 - p.c_c) * p.mu_eff
    ) * mean_step

    selected_steps = (selected - old_mean) / state.sigma
    rank_mu = (selected_steps * p.weights[:, np.newaxis]).T @ selected_steps
    rank_one = np.outer(state.path_c, state.path_c)
    decay = 1 - p.c_1 - p.c_mu + (1 - h_sigma) * p.c_1 * p.c_c * (2 - p.c_c)
    state.covariance = (
        decay * state.covariance + p.c_1 * rank_one + p.c_mu * rank_mu
    )

    state.sigma = max(
        state.sigma
        * math.exp((p.c_sigma / p.d_sigma) * (norm_path_sigma / p.chi_n - 1)),
        MIN_STEP_SIZE,
    )
    state.mean = new_mean
    state.generation += 1
    update_eigensystem(state)
    return state


def distance_function(state: OptimizerState, scaling: str = "C") -> DistanceFn:
    """Batched Mahalanobis distance from a query to many points.

    With scaling "C" the metric is C^-1; with "sigma2C" it is (sigma^2 C)^-1,
    i.e. the C-distance divided by sigma.
    """
    if scaling not in ("C", "sigma2C"):
        raise ValueError(f"Unknown distance scaling: {scaling!r}.")
    condition = state.condition_number()
    if condition > MAX_CONDITION_NUMBER:
        raise IllConditionedCovarianceError(
            f"Condition number of C is {condition:.3g}"
            f" (limit {MAX_CONDITION_NUMBER:.0e})."
        )
    eigenbasis = state.eigenbasis.copy()
    inverse_lengths = 1.0 / state.axis_lengths
    if scaling == "sigma2C":
        inverse_lengths = inverse_lengths / state.sigma

    def distances(query: np.ndarray, points: np.ndarray) -> np.ndarray:
        whitened = ((np.atleast_2d(points) - query) @ eigenbasis) * inverse_lengths
        return np.sqrt(np.sum(whitened**2, axis=1))

    return distances


def mahalanobis(
    state: OptimizerState,
    z1: DesignPoint,
    z2: DesignPoint,
    scaling: str = "C",
) -> float:
    z1 = as_design_point(z1, state.dimension)
    z2 = as_design_point(z2, state.dimension)
    return float(distance_function(state, scaling)(z1, z2)[0])

