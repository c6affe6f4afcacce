from __future__ import annotations

import pathlib
from dataclasses import dataclass
from typing import Optional, Sequence

import jinja2
import numpy as np

from ensemble_cma import BASE_LOGGER, ConfigError
from ensemble_cma.harness.campaign import run_campaign
from ensemble_cma.harness.config import RunConfig
from ensemble_cma.harness.trace import RunTrace

_logger = BASE_LOGGER.getChild("compare")

SUMMARY_TEMPLATE = """\
{{ "%-24s" | format("label") }} {{ "%16s" | format("threshold") }} {{ "%9s" | format("reached") }} {{ "%14s" | format("mean sims") }} {{ "%14s" | format("median sims") }}
{% for row in rows -%}
{{ "%-24s" | format(row.label) }} {{ "%16.6g" | format(row.threshold) }} {{ "%3d/%-3d" | format(row.n_reached, row.n_runs) }} ({{ "%3.0f" | format(100 * row.fraction_reached) }}%) {{ fmt(row.mean_simulations) }} {{ fmt(row.median_simulations) }}
{% endfor %}"""


@dataclass(frozen=True)
class SummaryRow:
    label: str
    threshold: float
    n_runs: int
    n_reached: int
    fraction_reached: float
    mean_simulations: Optional[float]
    median_simulations: Optional[float]


def summarize(
    traces_by_label: dict[str, list[RunTrace]], thresholds: Sequence[float]
) -> list[SummaryRow]:
    """Per label and threshold: how many runs reached the threshold on the
    verified objective, and the total simulations at first crossing over
    the runs that did."""
    rows = []
    for label, traces in traces_by_label.items():
        for threshold in thresholds:
            crossings = [
                c for c in (t.first_crossing(threshold) for t in traces) if c is not None
            ]
            rows.append(
                SummaryRow(
                    label=label,
                    threshold=float(threshold),
                    n_runs=len(traces),
                    n_reached=len(crossings),
                    fraction_reached=len(crossings) / len(traces) if traces else 0.0,
                    mean_simulations=float(np.mean(crossings)) if crossings else None,
                    median_simulations=(
                        float(np.median(crossings)) if crossings else None
                    ),
                )
            )
    return rows


def _format_simulations(value: Optional[float]) -> str:
    return f"{'-':>14}" if value is None else f"{value:14.1f}"


def render_summary(rows: Sequence[SummaryRow]) -> str:
    env = jinja2.Environment(keep_trailing_newline=True)
    template = env.from_string(SUMMARY_TEMPLATE)
    return template.render(rows=rows, fmt=_format_simulations)


def load_trace_dir(directory: pathlib.Path) -> tuple[str, list[RunTrace]]:
    paths = sorted(
        p for p in directory.glob("run_*.csv") if not p.name.endswith("_archive.csv")
    )
    if not paths:
        raise FileNotFoundError(f"No run traces in {directory}.")
    traces = [RunTrace.read(path) for path in paths]
    label = traces[0].header.get("label", directory.name)
    return label, traces


def _problem_descriptor(traces: list[RunTrace]) -> dict[str, str]:
    return {k: v for k, v in traces[0].header.items() if k.startswith("problem.")}


def load_trace_dirs(
    directories: Sequence[pathlib.Path],
) -> dict[str, list[RunTrace]]:
    """Traces of several campaigns keyed by label. The campaigns must carry
    distinct labels and run on the same problem instance."""
    traces_by_label: dict[str, list[RunTrace]] = {}
    reference: Optional[tuple[pathlib.Path, dict[str, str]]] = None
    for directory in directories:
        label, traces = load_trace_dir(directory)
        if label in traces_by_label:
            raise ConfigError(
                f"Label {label!r} of {directory} is already taken; rerun with"
                " --label to tell the campaigns apart."
            )
        descriptor = _problem_descriptor(traces)
        if reference is None:
            reference = (directory, descriptor)
        elif descriptor != reference[1]:
            raise ConfigError(
                f"{directory} runs on {descriptor}, but {reference[0]} runs on"
                f" {reference[1]}."
            )
        traces_by_label[label] = traces
    return traces_by_label


def compare_strategies(
    configs: Sequence[RunConfig],
    thresholds: Sequence[float],
    out_dir: Optional[pathlib.Path] = None,
) -> list[SummaryRow]:
    if not configs:
        raise ConfigError("Nothing to compare.")
    reference = configs[0]
    for config in configs[1:]:
        if (
            config.problem_settings != reference.problem_settings
            or config.estimator.n_realizations != reference.estimator.n_realizations
        ):
            raise ConfigError(
                f"{config.run_label} runs on {config.problem_settings}, but"
                f" {reference.run_label} runs on {reference.problem_settings}."
            )
    labels = [config.run_label for config in configs]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"Compared configurations need distinct labels: {labels}.")

    traces_by_label = {}
    for config in configs:
        _logger.info(f"Running campaign {config.run_label}")
        traces_by_label[config.run_label] = run_campaign(
            config, None if out_dir is None else out_dir / config.run_label
        )
    return summarize(traces_by_label, thresholds)
