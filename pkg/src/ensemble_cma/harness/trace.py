"""Per-run CSV traces: `# key=value` header, one row per generation, and a
footer with the best points found."""

from __future__ import annotations

import io
import json
import math
import pathlib
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np
import pandas as pd

TRACE_COLUMNS = [
    "run_id",
    "generation",
    "cumulative_estimation_sims",
    "cumulative_verification_sims",
    "best_estimate",
    "best_verified",
    "last_verified",
    "sigma",
    "neighbors_used_mean",
]
FOOTER_KEYS = (
    "p_max_E",
    "p_max_R",
    "best_estimate",
    "best_verified",
    "archive_simulations",
)


@dataclass
class TraceRow:
    run_id: int
    generation: int
    cumulative_estimation_sims: int
    cumulative_verification_sims: int
    best_estimate: float
    best_verified: Optional[float]
    last_verified: Optional[float]
    sigma: float
    neighbors_used_mean: float

    @property
    def total_simulations(self) -> int:
        return self.cumulative_estimation_sims + self.cumulative_verification_sims


@dataclass
class RunTrace:
    run_id: int
    header: dict[str, Any] = field(default_factory=dict)
    rows: list[TraceRow] = field(default_factory=list)
    status: str = "complete"
    error: Optional[str] = None
    p_max_E: Optional[np.ndarray] = None
    p_max_R: Optional[np.ndarray] = None
    best_estimate: Optional[float] = None
    best_verified: Optional[float] = None
    archive_simulations: int = 0

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    def mark_incomplete(self, error: str) -> None:
        self.status = "incomplete"
        self.error = error

    def first_crossing(self, threshold: float) -> Optional[int]:
        """Total simulations spent when best_verified first reached threshold."""
        for row in self.rows:
            if row.best_verified is not None and row.best_verified >= threshold:
                return row.total_simulations
        return None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(row) for row in self.rows], columns=TRACE_COLUMNS)

    def write(self, path: pathlib.Path) -> None:
        lines = [f"# {key}={_format_value(value)}" for key, value in self.header.items()]
        lines.append(f"# status={self.status}")
        if self.error is not None:
            lines.append(f"# error={' '.join(self.error.split())}")
        body = self.to_frame().to_csv(
            index=False, float_format="%.17g", na_rep="", lineterminator="\n"
        )
        footer = [
            f"# {key}={_format_value(getattr(self, key))}" for key in FOOTER_KEYS
        ]
        with open(path, "w", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
            f.write(body)
            f.write("\n".join(footer) + "\n")

    @classmethod
    def read(cls, path: pathlib.Path) -> RunTrace:
        header: dict[str, str] = {}
        footer: dict[str, str] = {}
        body: list[str] = []
        with open(path) as f:
            for line in f:
                if not line.startswith("# "):
                    body.append(line)
                    continue
                key, _, value = line[2:].rstrip("\n").partition("=")
                (footer if body else header)[key] = value

        frame = pd.read_csv(
            io.StringIO("".join(body)), float_precision="round_trip"
        )
        missing = set(TRACE_COLUMNS) - set(frame.columns)
        if missing:
            raise ValueError(f"Trace {path} lacks columns {sorted(missing)}.")

        rows = [
            TraceRow(
                run_id=int(r.run_id),
                generation=int(r.generation),
                cumulative_estimation_sims=int(r.cumulative_estimation_sims),
                cumulative_verification_sims=int(r.cumulative_verification_sims),
                best_estimate=float(r.best_estimate),
                best_verified=_optional_float(r.best_verified),
                last_verified=_optional_float(r.last_verified),
                sigma=float(r.sigma),
                neighbors_used_mean=float(r.neighbors_used_mean),
            )
            for r in frame.itertuples(index=False)
        ]
        status = header.pop("status", "complete")
        error = header.pop("error", None)
        run_id = int(header.get("run_id", rows[0].run_id if rows else 0))
        return cls(
            run_id=run_id,
            header=header,
            rows=rows,
            status=status,
            error=error,
            p_max_E=_parse_point(footer.get("p_max_E", "null")),
            p_max_R=_parse_point(footer.get("p_max_R", "null")),
            best_estimate=_optional_float(json.loads(footer.get("best_estimate", "null"))),
            best_verified=_optional_float(json.loads(footer.get("best_verified", "null"))),
            archive_simulations=int(footer.get("archive_simulations", "0")),
        )


def trace_filename(run_id: int, suffix: str = ".csv") -> str:
    return f"run_{run_id:03d}{suffix}"


def _format_value(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


def _optional_float(value: Any) -> Optional[float]:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return None
    return float(value)


def _parse_point(text: str) -> Optional[np.ndarray]:
    coords = json.loads(text)
    if coords is None:
        return None
    return np.array(coords, dtype=float)
