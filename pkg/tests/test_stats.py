import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import mannwhitneyu

from homotop import ValidationError
from homotop.metrics import DistanceTable
from homotop.stats import (between_set_tests, landscape, median_bottleneck_summary,
                           permutation_test, wilcoxon_mann_whitney)


def test_landscape_tent():
    L = landscape([[0.0, 2.0]], n_grid=5, cap=2.0)
    np.testing.assert_allclose(L.grid, [0, 0.5, 1, 1.5, 2])
    np.testing.assert_allclose(L.level(1), [0, 0.5, 1, 0.5, 0])
    assert not L.level(2).any()


def test_landscape_empty_and_multiplicity():
    L = landscape(np.empty((0, 2)))
    assert L.levels.shape[0] == 0 and not L.level(1).any()
    L = landscape([[0, 2], [0, 2]], n_grid=9)
    np.testing.assert_array_equal(L.level(1), L.level(2))
    with pytest.raises(ValidationError):
        landscape([[0, 2]], cap=1.0)
    with pytest.raises(ValidationError):
        L.level(0)


def test_landscape_essential_truncated():
    L = landscape([[0.0, np.inf]], n_grid=3, cap=2.0)
    np.testing.assert_allclose(L.level(1), [0, 1, 0])


@given(seed=st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_landscape_levels_ordered_and_lipschitz(seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0, 1, 6)
    D = np.column_stack([b, b + rng.uniform(0, 1, 6)])
    L = landscape(D, k_max=6, n_grid=101)
    step = L.grid[1] - L.grid[0]
    assert np.all(L.levels >= 0)
    assert np.all(np.diff(L.levels, axis=0) <= 0)
    assert np.all(np.abs(np.diff(L.levels, axis=1)) <= step * (1 + 1e-12))
    inside = np.zeros_like(L.grid, dtype=bool)
    for lo, hi in D:
        inside |= (L.grid > lo) & (L.grid < hi)
    assert not L.levels[:, ~inside].any()


def groups(rng, n, center=0.3):
    return [np.array([[center + rng.normal(0, 0.02), 1.0 + rng.normal(0, 0.05)]]) for _ in range(n)]


def test_permutation_identical_groups():
    g = groups(np.random.default_rng(1), 5)
    rep = permutation_test(g, g, n_perm=99)
    assert rep.statistic == 0.0 and rep.p_value == 1.0


def test_permutation_swap_and_jobs_invariance(rng):
    a, b = groups(rng, 6), groups(rng, 7, 0.35)
    ab = permutation_test(a, b, n_perm=199, seed=4)
    ba = permutation_test(b, a, n_perm=199, seed=4)
    assert ab.p_value == ba.p_value and ab.statistic == ba.statistic
    assert permutation_test(a, b, n_perm=199, seed=4, n_jobs=4).p_value == ab.p_value
    assert permutation_test(a, b, n_perm=199, seed=4) == ab


def test_permutation_detects_shift(rng):
    a, b = groups(rng, 10, 0.2), groups(rng, 10, 0.6)
    rep = permutation_test(a, b, n_perm=199, seed=0)
    assert rep.p_value == 1 / 200 and rep.significant


def test_permutation_errors():
    g = [np.array([[0.0, 1.0]])]
    with pytest.raises(ValidationError):
        permutation_test(g, g, n_perm=0)
    with pytest.raises(ValidationError):
        permutation_test([], g)


def test_report_json():
    rep = permutation_test([np.array([[0.0, 1.0]])], [np.array([[0.0, 2.0]])], n_perm=9, seed=3)
    data = json.loads(rep.to_json())
    assert {"statistic", "p_value", "n_perm", "seed", "groups"} <= set(data)
    assert data["groups"] == ["A", "B"] and 0 <= data["p_value"] <= 1


def test_wmw_examples():
    rep = wilcoxon_mann_whitney([1, 2, 3], [4, 5, 6])
    assert rep.exact and rep.p_value == pytest.approx(0.1, abs=1e-15)
    assert wilcoxon_mann_whitney([5], [5]).p_value == 1.0
    with pytest.raises(ValidationError):
        wilcoxon_mann_whitney([], [1])


def enumerate_p(a, b):
    pooled = np.concatenate([a, b])
    na = len(a)
    u_obs = sum(x > y for x in a for y in b)
    mean = na * len(b) / 2
    hits = total = 0
    for idx in itertools.combinations(range(len(pooled)), na):
        mask = np.zeros(len(pooled), bool)
        mask[list(idx)] = True
        u = sum(x > y for x in pooled[mask] for y in pooled[~mask])
        total += 1
        hits += abs(u - mean) >= abs(u_obs - mean)
    return hits / total


def test_wmw_exact_matches_enumeration():
    rng = np.random.default_rng(0)
    for na in range(1, 6):
        for nb in range(1, 6):
            for _ in range(3):
                x = rng.permutation(na + nb).astype(float)
                a, b = x[:na], x[na:]
                assert abs(wilcoxon_mann_whitney(a, b).p_value - enumerate_p(a, b)) <= 1e-12


def test_wmw_against_scipy(rng):
    a, b = rng.normal(size=4), rng.normal(0.5, size=5)
    assert wilcoxon_mann_whitney(a, b).p_value == pytest.approx(
        mannwhitneyu(a, b, method="exact").pvalue, abs=1e-12)
    a, b = rng.integers(0, 5, 20), rng.integers(1, 6, 25)
    rep = wilcoxon_mann_whitney(a, b)
    assert not rep.exact
    assert rep.p_value == pytest.approx(
        mannwhitneyu(a, b, method="asymptotic", use_continuity=True).pvalue, rel=1e-10)


def test_wmw_monotone_invariance(rng):
    a, b = rng.uniform(0.1, 2, 8), rng.uniform(0.1, 2, 9)
    p = wilcoxon_mann_whitney(a, b).p_value
    assert wilcoxon_mann_whitney(np.log(a), np.log(b)).p_value == p
    assert wilcoxon_mann_whitney(a ** 3 + 1, b ** 3 + 1).p_value == p


def table(value, labels=("a", "b", "c")):
    k = len(labels)
    M = np.full((k, k), float(value))
    np.fill_diagonal(M, 0)
    return DistanceTable(labels, M, 1)


def test_median_summary():
    med = median_bottleneck_summary([table(v) for v in range(1, 16)])
    assert all(v == 8.0 for _, _, v in med.cells())
    one = table(3.5)
    assert np.array_equal(median_bottleneck_summary([one]).matrix, one.matrix)
    with pytest.raises(ValidationError):
        median_bottleneck_summary([table(1), table(2, ("a", "b", "d"))])
    with pytest.raises(ValidationError):
        median_bottleneck_summary([])


def test_between_set_tests_shape():
    rng = np.random.default_rng(2)
    sets = {s: [table(rng.uniform(i, i + 1)) for _ in range(5)] for i, s in enumerate("ABCDE")}
    P, reports = between_set_tests(sets)
    assert len(P.cells()) == 10 and len(reports) == 10 and P.metric == "wmw-p-value"
    assert all(0 <= v <= 1 for _, _, v in P.cells())
