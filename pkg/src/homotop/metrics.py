"""Bottleneck and Wasserstein distances between persistence diagrams.

Diagrams are matched with the diagonal allowed: a point ``(b, d)`` may be
sent to its nearest diagonal point at sup-norm cost ``(d - b) / 2``.
Essential classes (infinite death) are matched separately by sorted birth;
unequal essential counts give an infinite distance.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ._validation import ValidationError

__all__ = [
    "EssentialMismatchWarning",
    "DistanceTable",
    "bottleneck_distance",
    "wasserstein_distance",
    "bottleneck_bruteforce",
    "wasserstein_bruteforce",
    "pairwise_table",
]


class EssentialMismatchWarning(RuntimeWarning):
    """Diagrams carry different numbers of essential classes; distance is infinite."""


def _as_points(diagram):
    pts = np.asarray(diagram, dtype=np.float64).reshape(-1, 2)
    if np.any(np.isnan(pts)):
        raise ValidationError("diagram contains NaN")
    if np.any(pts[:, 0] > pts[:, 1]):
        raise ValidationError("diagram points need birth <= death")
    if np.any(np.isinf(pts[:, 0])):
        raise ValidationError("births must be finite")
    return pts


def _canonical_order(X, Y):
    """Order the two diagrams canonically so that d(X, Y) and d(Y, X) run identical arithmetic."""
    a, b = _as_points(X), _as_points(Y)
    ka = (a.shape[0], np.sort(a, axis=0).tobytes())
    kb = (b.shape[0], np.sort(b, axis=0).tobytes())
    return (b, a) if kb < ka else (a, b)


def _split(diagram):
    pts = _as_points(diagram)
    finite = np.isfinite(pts[:, 1])
    return pts[finite], np.sort(pts[~finite, 0])


def _essential_costs(ex, ey):
    if ex.size != ey.size:
        warnings.warn(f"essential class counts differ ({ex.size} vs {ey.size}); "
                      f"distance is infinite", EssentialMismatchWarning, stacklevel=3)
        return None
    return np.abs(ex - ey)


def _sup_costs(X, Y):
    """Pairwise sup-norm costs and the diagonal costs of each side."""
    C = np.maximum(np.abs(X[:, None, 0] - Y[None, :, 0]), np.abs(X[:, None, 1] - Y[None, :, 1]))
    return C, 0.5 * (X[:, 1] - X[:, 0]), 0.5 * (Y[:, 1] - Y[:, 0])


def _perfect_matching_exists(C, px, py, t):
    n, m = C.shape
    rows, cols = [], []
    xi, yj = np.nonzero(C <= t)
    rows.append(xi)
    cols.append(yj)
    ok = np.nonzero(px <= t)[0]  # x_i to its own diagonal slot
    rows.append(ok)
    cols.append(m + ok)
    ok = np.nonzero(py <= t)[0]  # diagonal slot of y_j to y_j
    rows.append(n + ok)
    cols.append(ok)
    dr, dc = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")  # diagonal to diagonal
    rows.append(n + dr.ravel())
    cols.append(m + dc.ravel())
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    graph = csr_matrix((np.ones(r.size, dtype=np.int8), (r, c)), shape=(n + m, n + m))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_distance(X, Y):
    """Exact bottleneck distance.

    Binary search over the candidate costs (all pairwise and diagonal
    costs); each candidate is tested with a maximum bipartite matching.
    """
    X, Y = _canonical_order(X, Y)
    fx, ex = _split(X)
    fy, ey = _split(Y)
    ess = _essential_costs(ex, ey)
    if ess is None:
        return math.inf
    best = float(ess.max()) if ess.size else 0.0
    if fx.shape[0] + fy.shape[0] == 0:
        return best
    C, px, py = _sup_costs(fx, fy)
    candidates = np.unique(np.concatenate([[0.0], C.ravel(), px, py]))
    lo, hi = 0, candidates.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_exists(C, px, py, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return max(best, float(candidates[lo]))


def wasserstein_distance(X, Y, p=2.0, root=False):
    """Optimal-assignment cost ``sum |x - eta(x)|_inf^p`` over diagonal-augmented matchings.

    Returns the sum itself by default; ``root=True`` returns its ``p``-th
    root, which is the form that satisfies the triangle inequality.
    """
    if not p >= 1:
        raise ValidationError(f"p must be >= 1, got {p!r}")
    X, Y = _canonical_order(X, Y)
    fx, ex = _split(X)
    fy, ey = _split(Y)
    ess = _essential_costs(ex, ey)
    if ess is None:
        return math.inf
    terms = list(ess ** p)
    n, m = fx.shape[0], fy.shape[0]
    if n + m:
        C, px, py = _sup_costs(fx, fy)
        cost = np.full((n + m, m + n), np.inf)
        cost[:n, :m] = C ** p
        cost[np.arange(n), m + np.arange(n)] = px ** p
        cost[n + np.arange(m), np.arange(m)] = py ** p
        cost[n:, m:] = 0.0
        r, c = linear_sum_assignment(cost)
        terms.extend(cost[r, c])
    total = math.fsum(terms)
    return total ** (1.0 / p) if root else total


def _augmented_matchings(fx, fy):
    """Yield every partial injection X -> Y as a list of (i, j) pairs."""
    n, m = len(fx), len(fy)
    for k in range(min(n, m) + 1):
        for xs in itertools.combinations(range(n), k):
            for ys in itertools.permutations(range(m), k):
                yield list(zip(xs, ys))


def _bruteforce(X, Y, combine):
    fx, ex = _split(X)
    fy, ey = _split(Y)
    if ex.size != ey.size:
        return math.inf
    ess = list(np.abs(ex - ey))
    best = math.inf
    for matching in _augmented_matchings(fx, fy):
        used_x = {i for i, _ in matching}
        used_y = {j for _, j in matching}
        costs = [max(abs(fx[i, 0] - fy[j, 0]), abs(fx[i, 1] - fy[j, 1])) for i, j in matching]
        costs += [(fx[i, 1] - fx[i, 0]) / 2 for i in range(len(fx)) if i not in used_x]
        costs += [(fy[j, 1] - fy[j, 0]) / 2 for j in range(len(fy)) if j not in used_y]
        best = min(best, combine(costs + ess))
    return best


def bottleneck_bruteforce(X, Y):
    """Bottleneck distance by enumerating every augmented matching (tiny diagrams only)."""
    return _bruteforce(X, Y, lambda costs: max(costs, default=0.0))


def wasserstein_bruteforce(X, Y, p=2.0, root=False):
    """Wasserstein cost by enumerating every augmented matching (tiny diagrams only)."""
    total = _bruteforce(X, Y, lambda costs: math.fsum(c ** p for c in costs))
    return total ** (1.0 / p) if root else total


@dataclass(frozen=True)
class DistanceTable:
    labels: tuple
    matrix: np.ndarray
    dim: int
    metric: str = "bottleneck"

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=np.float64)
        k = len(self.labels)
        if M.shape != (k, k):
            raise ValidationError(f"table of {k} labels needs a {k}x{k} matrix")
        if np.any(np.diag(M) != 0) or not np.array_equal(M, M.T):
            raise ValidationError("distance table must be symmetric with zero diagonal")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "matrix", M)

    def cells(self):
        """Lower-triangle entries ``(row_label, col_label, value)`` row by row."""
        return [(self.labels[i], self.labels[j], float(self.matrix[i, j]))
                for i in range(len(self.labels)) for j in range(i)]

    def to_csv(self, path=None):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"H{self.dim}"] + list(self.labels))
        for i, label in enumerate(self.labels):
            writer.writerow([label] + [repr(float(self.matrix[i, j])) if j < i else ""
                                       for j in range(len(self.labels))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path, metric="bottleneck"):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        labels = rows[0][1:]
        dim = int(rows[0][0].lstrip("H"))
        M = np.zeros((len(labels), len(labels)))
        for i, row in enumerate(rows[1:]):
            for j in range(i):
                M[i, j] = M[j, i] = float(row[j + 1])
        return cls(tuple(labels), M, dim, metric)

    def pretty(self, digits=7):
        """Triangular text table, first column holding the row labels."""
        width = max(digits + 4, max(len(s) for s in self.labels) + 1)
        head = f"H{self.dim}".ljust(width) + "".join(s.rjust(width) for s in self.labels)
        lines = [head]
        for i, label in enumerate(self.labels):
            cells = [f"{self.matrix[i, j]:.{digits}f}".rjust(width) if j < i else " " * width
                     for j in range(len(self.labels))]
            lines.append(label.ljust(width) + "".join(cells))
        return "\n".join(line.rstrip() for line in lines) + "\n"


def pairwise_table(diagrams, dim, metric="bottleneck", p=2.0, root=False):
    """Distances between every pair of labelled diagrams in homology dimension ``dim``.

    Parameters
    ----------
    diagrams : sequence of (label, PersistenceDiagram)
    metric : {"bottleneck", "wasserstein"}
    """
    diagrams = list(diagrams)
    if len(diagrams) < 2:
        raise ValidationError("need >= 2 diagrams for a distance table")
    labels = [label for label, _ in diagrams]
    if len(set(labels)) != len(labels):
        raise ValidationError("diagram labels must be unique")
    if metric == "bottleneck":
        dist = bottleneck_distance
    elif metric == "wasserstein":
        def dist(a, b):
            return wasserstein_distance(a, b, p, root)
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    k = len(diagrams)
    M = np.zeros((k, k))
    for i in range(k):
        for j in range(i):
            M[i, j] = M[j, i] = dist(diagrams[i][1][dim], diagrams[j][1][dim])
    name = metric if metric == "bottleneck" else f"wasserstein{p:g}{'-root' if root else ''}"
    return DistanceTable(tuple(labels), M, dim, name)
