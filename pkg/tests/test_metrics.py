import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homotop import ValidationError
from homotop.metrics import (DistanceTable, EssentialMismatchWarning, bottleneck_bruteforce,
                             bottleneck_distance, pairwise_table, wasserstein_bruteforce,
                             wasserstein_distance)
from homotop.persistence import PersistenceDiagram


def random_diagram(rng, k):
    b = rng.uniform(0, 1, k)
    return np.column_stack([b, b + rng.exponential(0.3, k)])


diagrams = st.integers(0, 2 ** 31).map(
    lambda s: random_diagram(np.random.default_rng(s), np.random.default_rng(s + 1).integers(0, 6)))


def test_bottleneck_examples():
    X = np.array([[0.0, 2.0]])
    assert bottleneck_distance(X, X) == 0.0
    assert bottleneck_distance(X, np.empty((0, 2))) == 1.0
    assert bottleneck_distance(X, [[0.0, 3.0]]) == 1.0
    assert bottleneck_distance(np.empty((0, 2)), np.empty((0, 2))) == 0.0


def test_wasserstein_examples():
    X = np.array([[0.0, 2.0]])
    assert wasserstein_distance(X, X) == 0.0
    assert wasserstein_distance(X, np.empty((0, 2)), p=2) == 1.0
    assert wasserstein_distance([[0, 4]], [], p=2, root=True) == 2.0
    with pytest.raises(ValidationError):
        wasserstein_distance(X, X, p=0.5)


def test_invalid_points():
    with pytest.raises(ValidationError):
        bottleneck_distance([[2.0, 1.0]], [])
    with pytest.raises(ValidationError):
        bottleneck_distance([[np.nan, 1.0]], [])


def test_matches_bruteforce(rng):
    for _ in range(60):
        X = random_diagram(rng, rng.integers(0, 6))
        Y = random_diagram(rng, rng.integers(0, 6))
        assert bottleneck_distance(X, Y) == bottleneck_bruteforce(X, Y)
        for p in (1.0, 2.0):
            assert wasserstein_distance(X, Y, p) == pytest.approx(
                wasserstein_bruteforce(X, Y, p), abs=1e-9)


@given(X=diagrams, Y=diagrams, Z=diagrams)
@settings(max_examples=60, deadline=None)
def test_metric_axioms(X, Y, Z):
    for d in (bottleneck_distance, lambda a, b: wasserstein_distance(a, b, 2.0, root=True)):
        assert d(X, Y) == d(Y, X)
        assert d(X, X) == 0.0
        assert d(X, Z) <= d(X, Y) + d(Y, Z) + 1e-9


@given(X=diagrams, Y=diagrams, t=st.floats(0, 2))
@settings(max_examples=40, deadline=None)
def test_zero_persistence_point_is_invisible(X, Y, t):
    Xz = np.vstack([X, [[t, t]]])
    assert abs(bottleneck_distance(Xz, Y) - bottleneck_distance(X, Y)) <= 1e-12
    assert abs(wasserstein_distance(Xz, Y) - wasserstein_distance(X, Y)) <= 1e-12


def test_bottleneck_below_rooted_wasserstein(rng):
    for _ in range(30):
        X, Y = random_diagram(rng, 4), random_diagram(rng, 3)
        w_inf = bottleneck_distance(X, Y)
        for p in (1.0, 2.0, 3.0):
            assert w_inf <= wasserstein_distance(X, Y, p, root=True) + 1e-12


def test_essential_classes():
    X = np.array([[0.0, np.inf], [0.0, 1.0]])
    Y = np.array([[0.5, np.inf]])
    assert bottleneck_distance(X, Y) == 0.5
    with pytest.warns(EssentialMismatchWarning):
        assert bottleneck_distance(X, [[0.0, 1.0]]) == math.inf
    with pytest.warns(EssentialMismatchWarning):
        assert wasserstein_distance(X, []) == math.inf


def dgm(points):
    return PersistenceDiagram({1: points})


def test_pairwise_table_shape_and_output(tmp_path):
    names = ["takens3", "isomap", "krr", "fastica", "leim", "tsne"]
    rng = np.random.default_rng(3)
    labelled = [(n, dgm(random_diagram(rng, 3))) for n in names]
    table = pairwise_table(labelled, 1)
    assert len(table.cells()) == 15
    assert table.labels == tuple(names)
    path = tmp_path / "t.csv"
    table.to_csv(path)
    back = DistanceTable.from_csv(path)
    assert np.array_equal(back.matrix, table.matrix) and back.dim == 1
    text = table.pretty()
    lines = text.splitlines()
    assert lines[0].startswith("H1") and len(lines) == 7
    assert lines[1].strip() == "takens3"


def test_pairwise_table_edge_cases():
    same = dgm([[0.0, 1.0]])
    assert pairwise_table([("a", same), ("b", same)], 1).matrix[1, 0] == 0.0
    with pytest.raises(ValidationError, match="need >= 2"):
        pairwise_table([("a", same)], 1)
    with pytest.raises(ValidationError):
        pairwise_table([("a", same), ("a", same)], 1)
    with pytest.raises(ValidationError):
        pairwise_table([("a", same), ("b", same)], 1, metric="sliced")
    w = pairwise_table([("a", same), ("b", dgm([]))], 1, "wasserstein", p=2, root=True)
    assert w.metric == "wasserstein2-root" and w.matrix[1, 0] == 0.5


def test_table_invariants():
    with pytest.raises(ValidationError):
        DistanceTable(("a", "b"), [[0, 1], [2, 0]], 0)
    with pytest.raises(ValidationError):
        DistanceTable(("a", "b"), [[1, 0], [0, 0]], 0)
