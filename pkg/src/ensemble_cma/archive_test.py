import pathlib

import numpy as np
import pytest

from ensemble_cma.archive import EvaluationArchive, EvaluationRecord
from ensemble_cma.optimizer import distance_function, init_optimizer, update_eigensystem


def euclidean(query: np.ndarray, points: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((np.atleast_2d(points) - query) ** 2, axis=1))


def make_record(point: list[float], value: float = 1.0, realization: int = 1) -> EvaluationRecord:
    return EvaluationRecord(
        point=np.asarray(point, dtype=float),
        realization_id=realization,
        value=value,
        generation=0,
    )


def brute_force(
    archive: EvaluationArchive, query: np.ndarray, distance_fn, d_max: float, n_max: int
) -> list[tuple[int, float]]:
    distances = distance_fn(query, archive.points)
    ranked = sorted(
        (
            (float(distances[i]), int(archive.record_ids[i]))
            for i in range(len(archive))
            if distances[i] <= d_max
        ),
    )
    return [(record_id, distance) for distance, record_id in ranked[:n_max]]


def test_insert_and_count() -> None:
    archive = EvaluationArchive(2, 20)
    assert archive.count_simulations() == 0

    archive.insert(make_record([0.0, 0.0]))
    assert len(archive) == 1

    for k in range(9):
        archive.insert(make_record([float(k), 1.0]))
    assert archive.count_simulations() == 10
    assert [r.record_id for r in archive.records()] == list(range(10))


def test_duplicates_are_stored_separately() -> None:
    archive = EvaluationArchive(2, 20)
    archive.insert(make_record([1.0, 2.0], value=3.0, realization=4))
    archive.insert(make_record([1.0, 2.0], value=3.0, realization=4))

    neighbors = archive.nearest_within(np.array([1.0, 2.0]), euclidean, 1.0, 10)
    assert len(archive) == 2
    assert [r.record_id for r, _ in neighbors.records] == [0, 1]


@pytest.mark.parametrize(
    "record",
    [
        make_record([0.0, 0.0], realization=0),
        make_record([0.0, 0.0], realization=21),
        make_record([0.0, 0.0], value=float("inf")),
        make_record([0.0, 0.0, 0.0]),
    ],
)
def test_insert_rejects_invalid(record: EvaluationRecord) -> None:
    with pytest.raises(ValueError):
        EvaluationArchive(2, 20).insert(record)


def test_empty_archive_has_no_neighbors() -> None:
    neighbors = EvaluationArchive(3, 5).nearest_within(
        np.zeros(3), euclidean, 10.0, 4
    )
    assert len(neighbors) == 0


def test_nearest_within_truncates_to_closest() -> None:
    archive = EvaluationArchive(1, 5)
    for x in [0.5, 0.1, 0.4, 0.2, 0.3]:
        archive.insert(make_record([x]))

    neighbors = archive.nearest_within(np.array([0.0]), euclidean, 1.0, 3)

    assert neighbors.distances.tolist() == pytest.approx([0.1, 0.2, 0.3])
    assert [r.record_id for r, _ in neighbors.records] == [1, 3, 4]


def test_selection_boundary_is_inclusive() -> None:
    archive = EvaluationArchive(1, 5)
    archive.insert(make_record([2.0]))
    archive.insert(make_record([2.0 * (1 + 1e-9)]))

    neighbors = archive.nearest_within(np.array([0.0]), euclidean, 2.0, 10)

    assert [r.record_id for r, _ in neighbors.records] == [0]
    assert neighbors.distances.tolist() == [2.0]


def test_ties_ordered_by_record_id() -> None:
    archive = EvaluationArchive(2, 5)
    for point in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]):
        archive.insert(make_record(point))

    neighbors = archive.nearest_within(np.zeros(2), euclidean, 1.0, 3)

    assert [r.record_id for r, _ in neighbors.records] == [0, 1, 2]


def test_matches_brute_force_oracle() -> None:
    rng = np.random.default_rng(7)
    state = init_optimizer(3, np.zeros(3), 1.0, 4, 0)
    state.covariance = np.array([[2.0, 0.3, 0.0], [0.3, 1.0, 0.2], [0.0, 0.2, 0.5]])
    update_eigensystem(state)
    distance_fn = distance_function(state)

    archive = EvaluationArchive(3, 20)
    # Coarse lattice coordinates produce many exact distance ties.
    for _ in range(10_000):
        archive.insert(
            make_record(
                rng.integers(-5, 6, size=3).astype(float),
                value=float(rng.normal()),
                realization=int(rng.integers(1, 21)),
            )
        )

    for _ in range(1000):
        query = rng.integers(-5, 6, size=3).astype(float)
        d_max = float(rng.uniform(0.5, 6.0))
        n_max = int(rng.integers(1, 60))
        neighbors = archive.nearest_within(query, distance_fn, d_max, n_max)
        expected = brute_force(archive, query, distance_fn, d_max, n_max)

        assert [
            (r.record_id, d) for r, d in neighbors.records
        ] == expected
        assert np.all(np.diff(neighbors.distances) >= 0)


def test_query_does_not_mutate() -> None:
    archive = EvaluationArchive(2, 5)
    for k in range(5):
        archive.insert(make_record([float(k), 0.0], value=float(k)))
    before = archive.to_frame()

    archive.nearest_within(np.zeros(2), euclidean, 3.0, 2)

    assert archive.to_frame().equals(before)
    assert archive.count_simulations() == 5


def test_deferred_inserts_are_invisible_until_commit() -> None:
    archive = EvaluationArchive(1, 5)
    archive.insert(make_record([0.0]))

    with archive.deferred_inserts():
        archive.insert(make_record([0.1]))
        archive.insert(make_record([0.2]))
        assert archive.count_simulations() == 1
        assert len(archive.nearest_within(np.zeros(1), euclidean, 1.0, 10)) == 1

    assert archive.count_simulations() == 3
    assert [r.record_id for r in archive.records()] == [0, 1, 2]


def test_csv_dump_and_load(tmp_path: pathlib.Path) -> None:
    rng = np.random.default_rng(3)
    archive = EvaluationArchive(4, 20)
    for k in range(50):
        archive.insert(
            EvaluationRecord(
                point=rng.normal(size=4) * 1e3,
                realization_id=int(rng.integers(1, 21)),
                value=float(rng.normal()) * 1e10,
                generation=k // 10,
            )
        )
    path = tmp_path / "archive.csv"
    archive.dump_csv(path)

    header = path.read_text().splitlines()[0]
    assert header == (
        "record_id,generation,realization_id,value,coord_0,coord_1,coord_2,coord_3"
    )

    restored = EvaluationArchive.load_csv(path, 20)
    assert restored.to_frame().equals(archive.to_frame())
