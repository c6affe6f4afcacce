"""Lognormal property fields standing in for geostatistical realizations."""

from __future__ import annotations

import math
import pathlib
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import ndimage, signal


@dataclass(frozen=True)
class RealizationField:
    grid: np.ndarray  # shape (nx, ny), millidarcy
    cell_size: float  # meters
    realization_id: int

    @property
    def nx(self) -> int:
        return int(self.grid.shape[0])

    @property
    def ny(self) -> int:
        return int(self.grid.shape[1])

    @property
    def extent(self) -> tuple[float, float]:
        return self.nx * self.cell_size, self.ny * self.cell_size

    def sample(self, xy: np.ndarray) -> np.ndarray:
        """Bilinear interpolation at (m, 2) coordinates in meters.

        Cell values sit at cell centers; outside the outermost centers the
        field is extended with its edge values.
        """
        xy = np.atleast_2d(xy)
        cell_coords = xy.T / self.cell_size - 0.5
        return ndimage.map_coordinates(
            self.grid, cell_coords, order=1, mode="nearest"
        )

    def to_csv(self, path: pathlib.Path) -> None:
        # One line per y row, x increasing along the line.
        pd.DataFrame(self.grid.T).to_csv(
            path, header=False, index=False, float_format="%.17g", lineterminator="\n"
        )


def gaussian_kernel(correlation_cells: float) -> np.ndarray:
    """2-D Gaussian kernel truncated at 3 standard deviations, scaled so that
    smoothing unit white noise yields unit variance."""
    radius = max(1, math.ceil(3 * correlation_cells))
    offsets = np.arange(-radius, radius + 1)
    profile = np.exp(-0.5 * (offsets / correlation_cells) ** 2)
    kernel = np.outer(profile, profile)
    return kernel / np.sqrt(np.sum(kernel**2))


def generate_field(
    nx: int,
    ny: int,
    cell_size: float,
    correlation_cells: float,
    log_mean: float,
    log_std: float,
    seed: int,
    realization_id: int,
) -> RealizationField:
    if correlation_cells < 1:
        raise ValueError(
            f"Correlation length must be at least one cell, got {correlation_cells}."
        )
    if nx < 1 or ny < 1 or cell_size <= 0:
        raise ValueError(f"Invalid grid {nx}x{ny} with cell size {cell_size}.")

    kernel = gaussian_kernel(correlation_cells)
    pad = kernel.shape[0] - 1
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(realization_id,))
    )
    noise = rng.standard_normal((nx + pad, ny + pad))
    # "valid" keeps only cells whose kernel footprint lies inside the noise.
    smooth = signal.fftconvolve(noise, kernel, mode="valid")
    return RealizationField(
        grid=np.exp(log_mean + log_std * smooth),
        cell_size=cell_size,
        realization_id=realization_id,
    )
