"""Persistence landscapes and the hypothesis tests built on diagrams."""

from __future__ import annotations

import json
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import norm, rankdata

from ._validation import ValidationError
from .metrics import DistanceTable

__all__ = [
    "Landscape",
    "TestReport",
    "landscape",
    "permutation_test",
    "wilcoxon_mann_whitney",
    "median_bottleneck_summary",
    "between_set_tests",
    "SIGNIFICANCE_LEVEL",
]

SIGNIFICANCE_LEVEL = 0.05
EXACT_MAX_TOTAL = 12


@dataclass(frozen=True)
class Landscape:
    grid: np.ndarray
    levels: np.ndarray  # (n_levels, n_grid), levels[k] is lambda_{k+1}

    def level(self, k):
        """``lambda_k`` on the grid (1-based); zero beyond the stored levels."""
        if k < 1:
            raise ValidationError("landscape levels are numbered from 1")
        if k > self.levels.shape[0]:
            return np.zeros_like(self.grid)
        return self.levels[k - 1]


def _diagram_points(diagram):
    pts = np.asarray(diagram, dtype=np.float64).reshape(-1, 2)
    return pts


def landscape(diagram, k_max=5, n_grid=256, cap=None):
    """Persistence landscape sampled on ``n_grid`` uniform points of ``[0, cap]``.

    ``lambda_k(t)`` is the k-th largest value of ``max(0, min(t - b, d - t))``
    over the diagram points. Infinite deaths are truncated at ``cap``, which
    defaults to the largest finite death (or birth) present.
    """
    pts = _diagram_points(diagram)
    finite = pts[np.isfinite(pts[:, 1])]
    if cap is None:
        cap = float(finite[:, 1].max()) if finite.size else (
            float(pts[:, 0].max()) if pts.size else 1.0)
        cap = cap if cap > 0 else 1.0
    elif finite.size and cap < finite[:, 1].max():
        raise ValidationError(f"cap {cap} is below the largest finite death {finite[:, 1].max()}")
    grid = np.linspace(0.0, cap, n_grid)
    if pts.shape[0] == 0:
        return Landscape(grid, np.zeros((0, n_grid)))
    births = pts[:, 0][:, None]
    deaths = np.minimum(pts[:, 1], cap)[:, None]
    tents = np.maximum(0.0, np.minimum(grid[None, :] - births, deaths - grid[None, :]))
    k = min(k_max, pts.shape[0])
    levels = -np.sort(-tents, axis=0)[:k]
    return Landscape(grid, levels)


@dataclass(frozen=True)
class TestReport:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    test: str
    n_perm: int | None = None
    exact: bool = False
    seed: int | None = None
    groups: tuple = ("A", "B")
    alpha: float = SIGNIFICANCE_LEVEL
    extra: dict = field(default_factory=dict)

    @property
    def significant(self):
        return self.p_value < self.alpha

    def to_json(self):
        data = asdict(self)
        data["groups"] = list(self.groups)
        return json.dumps(data, indent=2, sort_keys=True, default=float) + "\n"


def _l2(diff, grid):
    return math.sqrt(float(np.trapezoid(diff * diff, grid)))


def permutation_test(group_a, group_b, dim=1, n_perm=999, seed=0, n_grid=256, cap=None,
                     labels=("A", "B"), n_jobs=1):
    """Two-sample permutation test on mean first-landscape functions.

    The statistic is the L2 distance between the group means of
    ``lambda_1``. Group labels are shuffled ``n_perm`` times and
    ``p = (1 + #{permuted >= observed}) / (n_perm + 1)``. Replicate ``r``
    draws from its own generator spawned from ``seed``, so the result does
    not depend on ``n_jobs``.

    ``group_a`` and ``group_b`` hold persistence diagrams (anything indexable
    by dimension) or raw ``(k, 2)`` arrays.
    """
    group_a, group_b = list(group_a), list(group_b)
    if not group_a or not group_b:
        raise ValidationError("both groups must be non-empty")
    if int(n_perm) < 1:
        raise ValidationError("n_perm must be >= 1")

    def points(d):
        return _diagram_points(d if isinstance(d, np.ndarray) else d[dim])

    pts = [points(d) for d in group_a + group_b]
    if cap is None:
        finite = [p[np.isfinite(p[:, 1]), 1] for p in pts]
        finite = np.concatenate(finite) if finite else np.empty(0)
        cap = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    L = np.array([landscape(p, 1, n_grid, cap).level(1) for p in pts])
    grid = np.linspace(0.0, cap, n_grid)
    na = len(group_a)
    la, lb = L[:na], L[na:]

    # canonical pool order makes the result symmetric in the two groups
    swap = (lb.shape[0], lb.tobytes()) < (la.shape[0], la.tobytes())
    pool = np.vstack([lb, la]) if swap else L
    n1 = lb.shape[0] if swap else na
    observed = _l2(la.mean(axis=0) - lb.mean(axis=0), grid)

    children = np.random.SeedSequence(seed).spawn(int(n_perm))

    def replicate(ss):
        perm = np.random.Generator(np.random.PCG64(ss)).permutation(pool.shape[0])
        return _l2(pool[perm[:n1]].mean(axis=0) - pool[perm[n1:]].mean(axis=0), grid)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as ex:
            permuted = np.array(list(ex.map(replicate, children)))
    else:
        permuted = np.array([replicate(ss) for ss in children])
    tol = 1e-12 * max(observed, 1.0)
    exceed = int(np.count_nonzero(permuted >= observed - tol))
    p = (1 + exceed) / (int(n_perm) + 1)
    return TestReport(observed, p, "landscape-permutation", int(n_perm), False, seed,
                      tuple(labels), extra={"dim": dim, "cap": cap, "n_grid": n_grid})


def _exact_u_counts(na, nb):
    """Number of labelings with each value of U (for na from na+nb distinct ranks)."""
    # counts[i][j][u]: ways with i from A and j from B placed, A-statistic u
    max_u = na * nb
    table = np.zeros((na + 1, nb + 1, max_u + 1), dtype=object)
    table[0, 0, 0] = 1
    for i in range(na + 1):
        for j in range(nb + 1):
            if i == 0 and j == 0:
                continue
            row = np.zeros(max_u + 1, dtype=object)
            if i > 0:
                # next largest observation belongs to A: it beats all j B's so far
                row[j:] += table[i - 1, j, :max_u + 1 - j]
            if j > 0:
                row += table[i, j - 1]
            table[i, j] = row
    return table[na, nb]


def wilcoxon_mann_whitney(sample_a, sample_b, labels=("A", "B")):
    """Two-sided Wilcoxon-Mann-Whitney rank-sum test.

    Exact null distribution when the combined size is at most 12 and there
    are no ties; otherwise the normal approximation with tie and continuity
    corrections.
    """
    a = np.asarray(sample_a, dtype=np.float64).ravel()
    b = np.asarray(sample_b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValidationError("both samples must be non-empty")
    na, nb = a.size, b.size
    n = na + nb
    ranks = rankdata(np.concatenate([a, b]))
    u = float(ranks[:na].sum() - na * (na + 1) / 2)
    ties = [t for t in Counter(np.concatenate([a, b]).tolist()).values() if t > 1]

    if n <= EXACT_MAX_TOTAL and not ties:
        counts = _exact_u_counts(na, nb)
        total = sum(counts)
        k = int(round(u))
        lower = sum(counts[:k + 1])
        upper = sum(counts[k:])
        p = min(1.0, 2 * min(lower, upper) / total)
        return TestReport(u, float(p), "wilcoxon-mann-whitney", None, True, None, tuple(labels))

    mu = na * nb / 2.0
    tie_term = sum(t ** 3 - t for t in ties) / (n * (n - 1)) if n > 1 else 0.0
    var = na * nb / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        p = 1.0
    else:
        z = max(abs(u - mu) - 0.5, 0.0) / math.sqrt(var)
        p = min(1.0, 2.0 * float(norm.sf(z)))
    return TestReport(u, p, "wilcoxon-mann-whitney", None, False, None, tuple(labels))


def median_bottleneck_summary(tables):
    """Cell-wise median across per-channel distance tables of one set."""
    tables = list(tables)
    if not tables:
        raise ValidationError("need at least one table")
    first = tables[0]
    for t in tables[1:]:
        if t.labels != first.labels or t.dim != first.dim:
            raise ValidationError("tables disagree on labels or homology dimension")
    M = np.median(np.stack([t.matrix for t in tables]), axis=0)
    return DistanceTable(first.labels, M, first.dim, f"median-{first.metric}")


def between_set_tests(tables_by_set):
    """Pairwise WMW tests between sets on their median distance cells.

    ``tables_by_set`` maps a set label to its per-channel tables (one
    homology dimension). Returns ``(p_table, reports)`` where ``p_table`` is
    a lower-triangular table of p-values over the set labels.
    """
    labels = list(tables_by_set)
    if len(labels) < 2:
        raise ValidationError("need >= 2 sets")
    medians = {s: median_bottleneck_summary(tables_by_set[s]) for s in labels}
    dims = {m.dim for m in medians.values()}
    if len(dims) != 1:
        raise ValidationError("sets disagree on homology dimension")
    samples = {s: np.array([v for _, _, v in medians[s].cells()]) for s in labels}
    k = len(labels)
    P = np.zeros((k, k))
    reports = {}
    for i in range(k):
        for j in range(i):
            rep = wilcoxon_mann_whitney(samples[labels[i]], samples[labels[j]],
                                        (labels[i], labels[j]))
            P[i, j] = P[j, i] = rep.p_value
            reports[(labels[i], labels[j])] = rep
    return DistanceTable(tuple(labels), P, dims.pop(), "wmw-p-value"), reports
