import pathlib

import numpy as np
import pytest

from ensemble_cma.benchmarks.field import generate_field, gaussian_kernel


def test_zero_log_std_is_constant() -> None:
    field = generate_field(19, 28, 180.0, 3.0, np.log(100.0), 0.0, 1, 1)

    assert np.all(field.grid == np.exp(np.log(100.0)))
    assert field.grid.shape == (19, 28)


def test_log_field_standard_deviation() -> None:
    field = generate_field(190, 280, 18.0, 3.0, 2.0, 0.8, seed=5, realization_id=1)
    log_field = np.log(field.grid)

    assert np.all(field.grid > 0)
    assert abs(log_field.std() - 0.8) < 0.15 * 0.8


def test_kernel_has_unit_output_variance() -> None:
    kernel = gaussian_kernel(2.5)

    assert kernel.shape == (17, 17)
    assert np.sum(kernel**2) == pytest.approx(1.0)


def test_realizations_differ() -> None:
    a = generate_field(19, 28, 180.0, 3.0, 4.6, 1.0, seed=7, realization_id=1)
    b = generate_field(19, 28, 180.0, 3.0, 4.6, 1.0, seed=7, realization_id=2)

    assert np.max(np.abs(a.grid - b.grid)) > 0


def test_generation_is_deterministic() -> None:
    a = generate_field(19, 28, 180.0, 3.0, 4.6, 1.0, seed=7, realization_id=3)
    b = generate_field(19, 28, 180.0, 3.0, 4.6, 1.0, seed=7, realization_id=3)

    assert np.array_equal(a.grid, b.grid)


def test_rejects_short_correlation() -> None:
    with pytest.raises(ValueError):
        generate_field(10, 10, 1.0, 0.5, 0.0, 1.0, seed=0, realization_id=1)


def test_bilinear_sampling() -> None:
    field = generate_field(4, 3, 10.0, 1.0, 0.0, 1.0, seed=2, realization_id=1)
    grid = field.grid

    centers = np.array([[5.0, 5.0], [15.0, 25.0]])
    assert field.sample(centers) == pytest.approx([grid[0, 0], grid[1, 2]])

    midway = field.sample(np.array([[10.0, 5.0]]))
    assert midway[0] == pytest.approx((grid[0, 0] + grid[1, 0]) / 2)


def test_csv_export(tmp_path: pathlib.Path) -> None:
    field = generate_field(4, 3, 10.0, 1.0, 0.0, 1.0, seed=2, realization_id=1)
    path = tmp_path / "field.csv"
    field.to_csv(path)

    rows = path.read_text().splitlines()
    assert len(rows) == 3
    assert [float(v) for v in rows[0].split(",")] == field.grid[:, 0].tolist()
