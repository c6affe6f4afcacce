import numpy as np
import pytest

from ensemble_cma.benchmarks import make_problem
from ensemble_cma.benchmarks.shifted_sphere import make_shifted_sphere


def test_single_realization_optimum_is_its_shift() -> None:
    problem = make_shifted_sphere(3, 1, 2.0, seed=4)

    assert np.array_equal(problem.ensemble_optimum, problem.shifts[0])
    assert problem.evaluate(problem.shifts[0], 1) == 0.0


def test_zero_shift_scale_makes_realizations_identical() -> None:
    problem = make_shifted_sphere(4, 5, 0.0, seed=1)
    point = np.array([0.5, -1.0, 2.0, 0.25])

    values = problem.ensemble_values(point)
    assert len(set(values)) == 1
    assert np.mean(values) == pytest.approx(values[0], rel=1e-12)


def test_ensemble_mean_at_optimum() -> None:
    problem = make_shifted_sphere(12, 20, 1.0, seed=9)

    mean = np.mean(problem.ensemble_values(problem.ensemble_optimum))
    assert mean == pytest.approx(-problem.ensemble_spread, rel=1e-12)


def test_closed_form_matches_brute_force() -> None:
    problem = make_shifted_sphere(12, 20, 1.0, seed=2)
    rng = np.random.default_rng(0)

    for point in rng.uniform(-3, 3, size=(100, 12)):
        brute_force = np.mean(problem.ensemble_values(point))
        assert brute_force == pytest.approx(problem.ensemble_mean(point), rel=1e-12)


def test_evaluation_is_deterministic() -> None:
    problem = make_shifted_sphere(5, 3, 1.0, seed=3)
    point = np.linspace(-1, 1, 5)
    first = problem.evaluate(point, 2)

    assert all(problem.evaluate(point, 2) == first for _ in range(10_000))


def test_problem_registry() -> None:
    problem = make_problem(
        "shifted_sphere", dimension=3, n_realizations=4, seed=5, shift_scale=0.5
    )

    assert problem.descriptor() == {
        "problem": "shifted_sphere",
        "problem_seed": 5,
        "dimension": 3,
        "n_realizations": 4,
        "shift_scale": 0.5,
    }
    with pytest.raises(ValueError):
        make_problem("rosenbrock", dimension=3, n_realizations=4, seed=5)


def test_rejects_bad_realization_id() -> None:
    problem = make_shifted_sphere(2, 3, 1.0, seed=0)

    with pytest.raises(ValueError):
        problem.evaluate(np.zeros(2), 0)
    with pytest.raises(ValueError):
        problem.evaluate(np.zeros(2), 4)
