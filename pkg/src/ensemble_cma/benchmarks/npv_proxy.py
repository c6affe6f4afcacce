"""A desk-scale stand-in for a reservoir simulator.

A well configuration is an injector and a producer. Production grows with
the harmonic-mean permeability along the flow path and peaks when the
wells are `optimal_spacing` apart:

    NPV = A * k_path * (D / D0) * exp(1 - D / D0) - 2 * well_cost

Two layouts are accepted: n = 4 (vertical wells, x/y of injector then
producer) and n = 12 (two straight 3-D segments, heel x/y/z then toe x/y/z
per well). 3-D segments are projected vertically; the flow path then runs
along the injector segment, between the segment midpoints, and along the
producer segment.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import yaml
from scipy import stats

from ensemble_cma.benchmarks.field import RealizationField, generate_field
from ensemble_cma.benchmarks.problem import Problem

SUPPORTED_DIMENSIONS = (4, 12)


@dataclass(frozen=True)
class FieldSettings:
    nx: int
    ny: int
    cell_size: float
    correlation_cells: float
    log_mean: float
    log_std: float
    depth_range: tuple[float, float]

    def __post_init__(self) -> None:
        if isinstance(self.depth_range, list):
            object.__setattr__(self, "depth_range", tuple(self.depth_range))


@dataclass(frozen=True)
class Economics:
    production_factor: float
    optimal_spacing: float
    well_cost: float
    penalty_factor: float
    path_samples: int = 32


@dataclass(frozen=True)
class ProxyDefaults:
    version: int
    field: FieldSettings
    economics: Economics


def load_defaults() -> ProxyDefaults:
    text = (
        importlib.resources.files("ensemble_cma.benchmarks")
        .joinpath("npv_defaults.yaml")
        .read_text()
    )
    document = yaml.safe_load(text)
    return ProxyDefaults(
        version=int(document["version"]),
        field=FieldSettings(**document["field"]),
        economics=Economics(**document["economics"]),
    )


def well_bounds(
    dimension: int, extent: tuple[float, float], depth_range: tuple[float, float]
) -> np.ndarray:
    if dimension not in SUPPORTED_DIMENSIONS:
        raise ValueError(
            f"The NPV proxy supports dimensions {SUPPORTED_DIMENSIONS}, got {dimension}."
        )
    x_range, y_range = (0.0, extent[0]), (0.0, extent[1])
    if dimension == 4:
        per_well = [x_range, y_range]
    else:
        per_well = [x_range, y_range, depth_range] * 2
    return np.array(per_well * 2, dtype=float)


def _flow_path(coords: np.ndarray, path_samples: int) -> tuple[np.ndarray, float]:
    """Sample locations along the flow path and the injector-producer
    distance. Both are invariant under swapping the two wells."""
    half = len(coords) // 2
    first, second = coords[:half], coords[half:]
    if tuple(second) < tuple(first):
        first, second = second, first

    t = np.linspace(0.0, 1.0, path_samples)[:, np.newaxis]

    def segment(start: np.ndarray, end: np.ndarray) -> np.ndarray:
        return start + t * (end - start)

    if half == 2:
        return segment(first, second), float(np.linalg.norm(second - first))

    heel_a, toe_a = first[0:2], first[3:5]
    heel_b, toe_b = second[0:2], second[3:5]
    middle_a, middle_b = (heel_a + toe_a) / 2, (heel_b + toe_b) / 2
    samples = np.concatenate(
        [
            segment(heel_a, toe_a),
            segment(middle_a, middle_b),
            segment(heel_b, toe_b),
        ]
    )
    return samples, float(np.linalg.norm(middle_b - middle_a))


def production_value(
    coords: np.ndarray, field: RealizationField, economics: Economics
) -> float:
    samples, spacing = _flow_path(coords, economics.path_samples)
    k_path = float(stats.hmean(field.sample(samples)))
    ratio = spacing / economics.optimal_spacing
    production = economics.production_factor * k_path * ratio * math.exp(1 - ratio)
    return production - 2 * economics.well_cost


def npv_proxy(
    point: np.ndarray,
    field: RealizationField,
    economics: Economics,
    depth_range: tuple[float, float] = (2300.0, 2500.0),
) -> float:
    point = np.asarray(point, dtype=float)
    bounds = well_bounds(len(point), field.extent, depth_range)
    projected = np.clip(point, bounds[:, 0], bounds[:, 1])
    excess = point - projected
    return production_value(
        projected, field, economics
    ) - economics.penalty_factor * math.fsum(excess * excess)


class NpvProxy(Problem):
    def __init__(
        self,
        dimension: int = 4,
        n_realizations: int = 20,
        seed: int = 0,
        log_std: Optional[float] = None,
        correlation_cells: Optional[float] = None,
        defaults: Optional[ProxyDefaults] = None,
    ) -> None:
        defaults = defaults or load_defaults()
        settings = defaults.field
        extent = (settings.nx * settings.cell_size, settings.ny * settings.cell_size)
        super().__init__(
            dimension,
            n_realizations,
            seed,
            bounds=well_bounds(dimension, extent, settings.depth_range),
            penalty_factor=defaults.economics.penalty_factor,
        )
        self.defaults = defaults
        self.economics = defaults.economics
        self.extent = extent
        self.log_std = settings.log_std if log_std is None else log_std
        self.correlation_cells = (
            settings.correlation_cells
            if correlation_cells is None
            else correlation_cells
        )
        self.fields = [
            generate_field(
                settings.nx,
                settings.ny,
                settings.cell_size,
                self.correlation_cells,
                settings.log_mean,
                self.log_std,
                seed,
                realization_id,
            )
            for realization_id in range(1, n_realizations + 1)
        ]
        self._logger.debug(
            f"Generated {n_realizations} fields of {settings.nx}x{settings.ny}"
            f" cells (log_std={self.log_std})"
        )

    @classmethod
    def name(cls) -> str:
        return "npv_proxy"

    def parameters(self) -> dict[str, Any]:
        return {
            "log_std": self.log_std,
            "correlation_cells": self.correlation_cells,
            "economics_version": self.defaults.version,
        }

    def default_start(self) -> tuple[np.ndarray, float]:
        assert self.bounds is not None
        center = self.bounds.mean(axis=1)
        return center, 0.3 * min(self.extent)

    def _simulate(self, coords: np.ndarray, realization_id: int) -> float:
        return production_value(coords, self.fields[realization_id - 1], self.economics)
