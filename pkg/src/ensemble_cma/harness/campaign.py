from __future__ import annotations

import contextlib
import math
import pathlib
from typing import Any, Iterator, Optional

import numpy as np

from ensemble_cma import BASE_LOGGER
from ensemble_cma.archive import EvaluationArchive
from ensemble_cma.benchmarks import Problem, SimulationError
from ensemble_cma.estimators import EstimateResult, EstimationStrategy
from ensemble_cma.estimators.aggregators import aggregate_mean
from ensemble_cma.estimators.strategy import record, simulate
from ensemble_cma.harness.config import RunConfig
from ensemble_cma.harness.random_streams import RandomStreams
from ensemble_cma.harness.trace import RunTrace, TraceRow, trace_filename
from ensemble_cma.optimizer import (
    DesignPoint,
    OptimizerError,
    OptimizerState,
    ask,
    init_optimizer,
    tell,
)

_logger = BASE_LOGGER.getChild("harness")


@contextlib.contextmanager
def capture_run_failure(trace: RunTrace) -> Iterator[None]:
    """Log a simulator or optimizer failure and mark the run incomplete
    instead of propagating it; anything else propagates."""
    try:
        yield
    except SimulationError as e:
        _logger.exception(f"Run {trace.run_id} aborted by a simulator failure")
        trace.mark_incomplete(str(e))
    except OptimizerError as e:
        _logger.exception(f"Run {trace.run_id} aborted by an optimizer failure")
        trace.mark_incomplete(f"{type(e).__name__}: {e}")


def verify(
    point: DesignPoint, problem: Problem, archive: EvaluationArchive, generation: int
) -> float:
    """Ensemble mean over every realization; the records join the archive."""
    realization_ids = range(1, problem.n_realizations + 1)
    values = simulate(point, problem, realization_ids)
    record(archive, point, realization_ids, values, generation)
    return aggregate_mean(values)


def trace_header(config: RunConfig, problem: Problem, run_id: int) -> dict[str, Any]:
    header: dict[str, Any] = {"run_id": run_id}
    header.update(config.to_mapping())
    header["label"] = config.run_label
    header.update({f"problem.{k}": v for k, v in problem.descriptor().items()})
    return header


class CampaignRun:
    """One independent optimization run: ask, estimate, tell, verify, until
    the simulation budget is spent."""

    def __init__(self, config: RunConfig, problem: Problem, run_id: int) -> None:
        self.config = config
        self.problem = problem
        self.streams = RandomStreams(config.master_seed, run_id)
        self.archive = EvaluationArchive(problem.dimension, problem.n_realizations)
        self.strategy = EstimationStrategy.get_strategy_by_name(config.strategy)(
            config.estimator
        )
        self.trace = RunTrace(
            run_id=run_id, header=trace_header(config, problem, run_id)
        )

        m0, sigma0 = problem.default_start()
        if config.initial_mean is not None:
            m0 = np.array(config.initial_mean, dtype=float)
        if config.initial_step_size is not None:
            sigma0 = config.initial_step_size
        self.state: OptimizerState = init_optimizer(
            problem.dimension,
            m0,
            sigma0,
            config.population_size,
            self.streams.optimizer_seed(),
        )

        self.estimation_sims = 0
        self.verification_sims = 0
        self.best_estimate = -math.inf
        self.best_verified: Optional[float] = None
        self.last_verified: Optional[float] = None

    @property
    def total_simulations(self) -> int:
        return self.estimation_sims + self.verification_sims

    def run(self) -> RunTrace:
        _logger.info(
            f"Starting run {self.trace.run_id} of {self.config.run_label}"
            f" (budget {self.config.budget_simulations} simulations)"
        )
        with capture_run_failure(self.trace):
            while self.total_simulations < self.config.budget_simulations:
                self._generation()
        self.trace.archive_simulations = self.archive.count_simulations()
        _logger.info(
            f"Run {self.trace.run_id} {self.trace.status} after"
            f" {self.state.generation} generations:"
            f" {self.estimation_sims} estimation and {self.verification_sims}"
            f" verification simulations, best verified {self.best_verified}"
        )
        return self.trace

    def _estimate_population(
        self, points: list[DesignPoint], generation: int
    ) -> list[EstimateResult]:
        visibility = (
            contextlib.nullcontext()
            if self.config.estimator.intra_generation_visibility
            else self.archive.deferred_inserts()
        )
        results = []
        with visibility:
            for index, point in enumerate(points):
                results.append(
                    self.strategy.estimate(
                        point,
                        self.problem,
                        self.archive,
                        self.state,
                        self.streams.realization_rng(generation, index),
                        generation,
                    )
                )
        return results

    def _generation(self) -> None:
        generation = self.state.generation
        points = ask(self.state)
        results = self._estimate_population(points, generation)
        self.estimation_sims += sum(r.fresh_simulations for r in results)
        estimates = [r.estimate for r in results]
        tell(self.state, points, estimates, maximize=True)

        best = int(np.argmax(estimates))
        improved = estimates[best] > self.best_estimate
        if improved:
            self.best_estimate = estimates[best]
            self.trace.best_estimate = estimates[best]
            self.trace.p_max_E = points[best].copy()
        if improved or self.config.verification == "every_generation":
            self._verify(points[best], generation)

        self.trace.rows.append(
            TraceRow(
                run_id=self.trace.run_id,
                generation=generation,
                cumulative_estimation_sims=self.estimation_sims,
                cumulative_verification_sims=self.verification_sims,
                best_estimate=self.best_estimate,
                best_verified=self.best_verified,
                last_verified=self.last_verified,
                sigma=self.state.sigma,
                neighbors_used_mean=float(np.mean([r.neighbors_used for r in results])),
            )
        )
        _logger.debug(
            f"Run {self.trace.run_id} generation {generation}: best estimate"
            f" {self.best_estimate:.6g}, sigma {self.state.sigma:.3g},"
            f" {self.total_simulations} simulations"
        )

    def _verify(self, point: DesignPoint, generation: int) -> None:
        value = verify(point, self.problem, self.archive, generation)
        self.verification_sims += self.problem.n_realizations
        self.last_verified = value
        if self.best_verified is None or value > self.best_verified:
            self.best_verified = value
            self.trace.best_verified = value
            self.trace.p_max_R = point.copy()
        _logger.info(
            f"Run {self.trace.run_id} generation {generation}: verified"
            f" {value:.6g} (best {self.best_verified:.6g})"
        )


def run_campaign(
    config: RunConfig, out_dir: Optional[pathlib.Path] = None
) -> list[RunTrace]:
    """Run n_runs independent runs on one problem instance.

    With out_dir, each run writes its trace, its archive and its final
    optimizer state there.
    """
    problem = config.problem_settings.build(config.estimator.n_realizations)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    traces = []
    for run_id in range(config.n_runs):
        run = CampaignRun(config, problem, run_id)
        trace = run.run()
        traces.append(trace)
        if out_dir is not None:
            trace.write(out_dir / trace_filename(run_id))
            run.archive.dump_csv(out_dir / trace_filename(run_id, "_archive.csv"))
            (out_dir / trace_filename(run_id, "_state.yaml")).write_text(
                run.state.to_yaml()
            )
            _logger.info(f"Wrote run {run_id} artifacts to {out_dir}")
    return traces
