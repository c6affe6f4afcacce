import pathlib
from unittest.mock import patch

import numpy as np
import pytest

from ensemble_cma.archive import EvaluationArchive
from ensemble_cma.harness.campaign import run_campaign
from ensemble_cma.harness.random_streams import RandomStreams
from ensemble_cma.harness.trace import RunTrace
from ensemble_cma.optimizer import IllConditionedCovarianceError
from ensemble_cma.test_utils import (
    patch_failing_simulator,
    read_trace_files,
    small_config,
)


def increments(values: list[int]) -> list[int]:
    return [b - a for a, b in zip([0] + values[:-1], values)]


def test_mean_of_samples_accounting() -> None:
    config = small_config(
        strategy="mean_of_samples",
        n_realizations=20,
        population_size=40,
        budget_simulations=4000,
        n_runs=1,
    )
    (trace,) = run_campaign(config)

    estimation = [r.cumulative_estimation_sims for r in trace.rows]
    verification = [r.cumulative_verification_sims for r in trace.rows]
    assert set(increments(estimation)) == {800}
    assert set(increments(verification)) <= {0, 20}
    assert verification[0] == 20
    assert trace.rows[-1].total_simulations >= 4000
    assert trace.rows[-2].total_simulations < 4000


def test_neighborhood_accounting_after_bootstrap() -> None:
    config = small_config(
        n_realizations=20,
        population_size=40,
        bootstrap_threshold=40,
        max_neighbors=40,
        selection_distance=8.0,
        budget_simulations=600,
        n_runs=1,
    )
    (trace,) = run_campaign(config)

    estimation = [r.cumulative_estimation_sims for r in trace.rows]
    assert set(increments(estimation)) == {40}
    assert trace.rows[0].neighbors_used_mean == 0.0
    assert trace.rows[-1].neighbors_used_mean > 0


def test_budget_smaller_than_one_generation() -> None:
    config = small_config(
        strategy="mean_of_samples",
        n_realizations=20,
        population_size=40,
        budget_simulations=20,
        n_runs=1,
    )
    (trace,) = run_campaign(config)

    assert len(trace.rows) <= 1


def test_every_generation_verification() -> None:
    config = small_config(verification="every_generation", n_runs=1)
    (trace,) = run_campaign(config)

    verification = [r.cumulative_verification_sims for r in trace.rows]
    assert set(increments(verification)) == {4}
    assert all(r.last_verified is not None for r in trace.rows)


@pytest.mark.parametrize("visibility", ["on", "off"])
def test_traces_are_byte_identical(tmp_path: pathlib.Path, visibility: str) -> None:
    config = small_config(intra_generation_visibility=visibility)
    run_campaign(config, tmp_path / "first")
    run_campaign(config, tmp_path / "second")

    first = read_trace_files(tmp_path / "first")
    assert len(first) == 6
    assert first == read_trace_files(tmp_path / "second")


@pytest.mark.parametrize("strategy", ["mean_of_samples", "one_realization", "neighborhood"])
def test_simulations_are_conserved(tmp_path: pathlib.Path, strategy: str) -> None:
    traces = run_campaign(small_config(strategy=strategy), tmp_path)

    for trace in traces:
        assert trace.complete
        assert trace.archive_simulations == trace.rows[-1].total_simulations
        archive = EvaluationArchive.load_csv(
            tmp_path / f"run_{trace.run_id:03d}_archive.csv", 4
        )
        assert archive.count_simulations() == trace.archive_simulations


def test_trace_series_are_monotone() -> None:
    for trace in run_campaign(small_config(n_runs=3)):
        totals = [r.total_simulations for r in trace.rows]
        assert totals == sorted(totals)
        verified = [r.best_verified for r in trace.rows if r.best_verified is not None]
        assert verified == sorted(verified)
        estimates = [r.best_estimate for r in trace.rows]
        assert estimates == sorted(estimates)


def test_best_verified_is_exact_ensemble_mean(tmp_path: pathlib.Path) -> None:
    config = small_config()
    run_campaign(config, tmp_path)
    problem = config.problem_settings.build(config.estimator.n_realizations)

    for path in sorted(tmp_path.glob("run_00?.csv")):
        trace = RunTrace.read(path)
        assert trace.p_max_R is not None
        assert trace.best_verified == np.mean(problem.ensemble_values(trace.p_max_R))
        assert trace.best_verified == trace.rows[-1].best_verified


def test_runs_differ_but_share_the_problem() -> None:
    first, second = run_campaign(small_config())

    assert first.header["problem.problem_seed"] == second.header["problem.problem_seed"]
    assert first.rows[0].best_estimate != second.rows[0].best_estimate


@patch_failing_simulator(fail_after=30)
def test_simulator_failure_leaves_incomplete_trace(tmp_path: pathlib.Path) -> None:
    (trace,) = run_campaign(small_config(n_runs=1), tmp_path)

    assert not trace.complete
    assert trace.error is not None and "crashed" in trace.error
    text = (tmp_path / "run_000.csv").read_text()
    assert "# status=incomplete\n" in text
    assert "# error=" in text
    assert RunTrace.read(tmp_path / "run_000.csv").status == "incomplete"


def test_optimizer_failure_leaves_incomplete_traces(tmp_path: pathlib.Path) -> None:
    def ill_conditioned(*args: object, **kwargs: object) -> None:
        raise IllConditionedCovarianceError("Condition number of C is 1e+15")

    with patch(
        "ensemble_cma.estimators.neighborhood.distance_function", new=ill_conditioned
    ):
        traces = run_campaign(small_config(), tmp_path)

    assert [t.status for t in traces] == ["incomplete", "incomplete"]
    assert all(
        t.error is not None and "IllConditionedCovarianceError" in t.error
        for t in traces
    )
    assert RunTrace.read(tmp_path / "run_001.csv").status == "incomplete"


def test_random_streams() -> None:
    streams = RandomStreams(3, 0)

    assert streams.optimizer_seed() == RandomStreams(3, 0).optimizer_seed()
    assert streams.optimizer_seed() != RandomStreams(3, 1).optimizer_seed()
    assert streams.realization_rng(2, 5).integers(1 << 30) == (
        RandomStreams(3, 0).realization_rng(2, 5).integers(1 << 30)
    )
    assert streams.realization_rng(2, 5).random() != streams.realization_rng(2, 6).random()
