"""The training set: every simulation performed during a run."""

from __future__ import annotations

import contextlib
import math
import pathlib
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from ensemble_cma import BASE_LOGGER
from ensemble_cma.optimizer import DistanceFn


@dataclass(frozen=True)
class EvaluationRecord:
    point: np.ndarray
    realization_id: int
    value: float
    generation: int
    record_id: Optional[int] = None


@dataclass
class NeighborSet:
    records: list[tuple[EvaluationRecord, float]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def values(self) -> np.ndarray:
        return np.array([record.value for record, _ in self.records], dtype=float)

    @property
    def distances(self) -> np.ndarray:
        return np.array([distance for _, distance in self.records], dtype=float)


class EvaluationArchive:
    """Append-only store with exhaustive-scan neighbor retrieval.

    Points are kept in a contiguous array so that one query evaluates the
    distance to every record in a single batched call.
    """

    INITIAL_CAPACITY = 1024

    def __init__(self, dimension: int, n_realizations: int) -> None:
        if dimension < 1 or n_realizations < 1:
            raise ValueError(
                f"Invalid archive shape: {dimension=}, {n_realizations=}."
            )
        self.dimension = dimension
        self.n_realizations = n_realizations
        self._logger = BASE_LOGGER.getChild("archive")
        self._points = np.empty((self.INITIAL_CAPACITY, dimension))
        self._values = np.empty(self.INITIAL_CAPACITY)
        self._realization_ids = np.empty(self.INITIAL_CAPACITY, dtype=np.int64)
        self._generations = np.empty(self.INITIAL_CAPACITY, dtype=np.int64)
        self._record_ids = np.empty(self.INITIAL_CAPACITY, dtype=np.int64)
        self._size = 0
        self._next_record_id = 0
        self._pending: list[EvaluationRecord] | None = None

    def __len__(self) -> int:
        return self._size

    def count_simulations(self) -> int:
        return self._size

    def _validate(self, record: EvaluationRecord) -> None:
        if np.shape(record.point) != (self.dimension,):
            raise ValueError(
                f"Record point has shape {np.shape(record.point)}, expected"
                f" ({self.dimension},)."
            )
        if not 1 <= record.realization_id <= self.n_realizations:
            raise ValueError(
                f"Realization id {record.realization_id} outside"
                f" [1, {self.n_realizations}]."
            )
        if not math.isfinite(record.value):
            raise ValueError(f"Record value must be finite, got {record.value}.")
        if record.generation < 0:
            raise ValueError(f"Negative generation stamp {record.generation}.")

    def insert(self, record: EvaluationRecord) -> None:
        self._validate(record)
        if self._pending is not None:
            self._pending.append(record)
            return
        self._append(record)

    def _append(self, record: EvaluationRecord) -> None:
        record_id = self._next_record_id
        if record.record_id is not None:
            if record.record_id < self._next_record_id:
                raise ValueError(
                    f"Record id {record.record_id} is not increasing"
                    f" (next free id is {self._next_record_id})."
                )
            record_id = record.record_id

        if self._size == len(self._values):
            self._grow()
        i = self._size
        self._points[i] = record.point
        self._values[i] = record.value
        self._realization_ids[i] = record.realization_id
        self._generations[i] = record.generation
        self._record_ids[i] = record_id
        self._size += 1
        self._next_record_id = record_id + 1

    def _grow(self) -> None:
        capacity = 2 * len(self._values)
        self._points = np.resize(self._points, (capacity, self.dimension))
        self._values = np.resize(self._values, capacity)
        self._realization_ids = np.resize(self._realization_ids, capacity)
        self._generations = np.resize(self._generations, capacity)
        self._record_ids = np.resize(self._record_ids, capacity)

    @contextlib.contextmanager
    def deferred_inserts(self) -> Iterator[None]:
        """Buffer inserts until the block exits, then commit them in order.

        Buffered records are invisible to queries and to the simulation
        counter while the block runs.
        """
        if self._pending is not None:
            raise RuntimeError("Deferred inserts are already active.")
        self._pending = []
        try:
            yield
        finally:
            pending, self._pending = self._pending, None
            for record in pending:
                self._append(record)

    def record(self, index: int) -> EvaluationRecord:
        if not 0 <= index < self._size:
            raise IndexError(index)
        return EvaluationRecord(
            point=self._points[index].copy(),
            realization_id=int(self._realization_ids[index]),
            value=float(self._values[index]),
            generation=int(self._generations[index]),
            record_id=int(self._record_ids[index]),
        )

    def records(self) -> list[EvaluationRecord]:
        return [self.record(i) for i in range(self._size)]

    @property
    def points(self) -> np.ndarray:
        return self._points[: self._size]

    @property
    def record_ids(self) -> np.ndarray:
        return self._record_ids[: self._size]

    def nearest_within(
        self,
        query: np.ndarray,
        distance_fn: DistanceFn,
        d_max: float,
        n_max: int,
    ) -> NeighborSet:
        if not d_max > 0:
            raise ValueError(f"d_max must be positive, got {d_max}.")
        if n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {n_max}.")
        if self._size == 0:
            return NeighborSet()

        distances = distance_fn(np.asarray(query, dtype=float), self.points)
        candidates = np.flatnonzero(distances <= d_max)
        # Ascending distance, ties by record id (older first).
        order = np.lexsort(
            (self.record_ids[candidates], distances[candidates])
        )
        chosen = candidates[order[:n_max]]
        return NeighborSet(
            records=[(self.record(int(i)), float(distances[i])) for i in chosen]
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            {
                "record_id": self.record_ids,
                "generation": self._generations[: self._size],
                "realization_id": self._realization_ids[: self._size],
                "value": self._values[: self._size],
            }
        )
        for k in range(self.dimension):
            frame[f"coord_{k}"] = self.points[:, k]
        return frame

    def dump_csv(self, path: pathlib.Path) -> None:
        self.to_frame().to_csv(
            path, index=False, float_format="%.17g", lineterminator="\n"
        )
        self._logger.info(f"Wrote {self._size} archive records to {path}")

    @classmethod
    def load_csv(cls, path: pathlib.Path, n_realizations: int) -> EvaluationArchive:
        frame = pd.read_csv(path, float_precision="round_trip")
        coord_columns = [c for c in frame.columns if c.startswith("coord_")]
        archive = cls(len(coord_columns), n_realizations)
        points = frame[coord_columns].to_numpy(dtype=float)
        for row, point in zip(frame.itertuples(index=False), points):
            archive.insert(
                EvaluationRecord(
                    point=point,
                    realization_id=int(row.realization_id),
                    value=float(row.value),
                    generation=int(row.generation),
                    record_id=int(row.record_id),
                )
            )
        return archive
