"""Persistent homology over F2 by boundary-matrix reduction.

Columns are stored as Python integers used as bit sets: adding two columns
mod 2 is a XOR and the lowest one is ``bit_length() - 1``. Row indices are
local to the face dimension, which keeps the integers short.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import ValidationError, check_point_cloud
from .complexes import (FilteredComplex, default_max_scale, distance_matrix, maxmin_subsample,
                        rips_filtration, validate_filtration)

__all__ = [
    "BoundaryMatrixF2",
    "PersistencePairs",
    "PersistenceDiagram",
    "Bar",
    "boundary_matrix",
    "reduce_and_pair",
    "persistence_diagram",
    "betti_at",
    "betti_bruteforce",
    "barcode_of",
    "RipsPersistence",
]

BRUTEFORCE_MAX_SIMPLICES = 2000


@dataclass(frozen=True)
class BoundaryMatrixF2:
    """Sparse F2 boundary matrix; ``columns[k]`` lists the face indices of simplex ``k``."""

    columns: tuple
    dims: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.columns)

    def to_dense(self):
        n = len(self.columns)
        M = np.zeros((n, n), dtype=np.uint8)
        for j, col in enumerate(self.columns):
            M[list(col), j] = 1
        return M


def boundary_matrix(fc):
    """Boundary matrix of ``fc`` with rows and columns in filtration order."""
    report = validate_filtration(fc)
    if not report:
        raise ValidationError(f"not a valid filtration: {report.message}")
    index = {s: i for i, s in enumerate(fc.simplices)}
    columns = []
    for s in fc.simplices:
        if len(s) == 1:
            columns.append(())
        else:
            columns.append(tuple(sorted(index[s[:j] + s[j + 1:]] for j in range(len(s)))))
    return BoundaryMatrixF2(tuple(columns), fc.dims, fc.values)


@dataclass(frozen=True)
class PersistencePairs:
    """Index pairs ``(creator, destroyer)`` plus unpaired creators."""

    pairs: tuple
    essential: tuple


def reduce_and_pair(B, clearing=True):
    """Left-to-right column reduction with lowest-one pivoting.

    Dimensions are reduced from the top down so that columns already known
    to be creators (pivot rows of the dimension above) can be skipped; the
    pairing is the same as with the plain algorithm.
    """
    n = len(B.columns)
    dims = np.asarray(B.dims)
    local = np.empty(n, dtype=np.intp)
    members = {}
    for d in np.unique(dims):
        idx = np.nonzero(dims == d)[0]
        members[int(d)] = idx
        local[idx] = np.arange(idx.size)

    paired = {}  # destroyer -> creator, global indices
    creators = set()
    for d in sorted(members, reverse=True):
        if d == 0:
            continue
        faces_global = members[d - 1]
        pivot_col = {}
        reduced = {}
        for j in members[d]:
            j = int(j)
            if clearing and j in creators:
                continue
            col = 0
            for r in B.columns[j]:
                col |= 1 << int(local[r])
            while col:
                low = col.bit_length() - 1
                other = pivot_col.get(low)
                if other is None:
                    break
                col ^= reduced[other]
            if col:
                low = col.bit_length() - 1
                pivot_col[low] = j
                reduced[j] = col
                creator = int(faces_global[low])
                paired[j] = creator
                creators.add(creator)

    destroyers = set(paired)
    pairs = tuple(sorted((c, dcol) for dcol, c in paired.items()))
    essential = tuple(i for i in range(n) if i not in destroyers and i not in creators)
    return PersistencePairs(pairs, essential)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Per-dimension arrays of (birth, death) rows; essential classes have ``death = inf``."""

    pairs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for dim, pts in self.pairs.items():
            arr = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
            if np.any(np.isnan(arr)) or np.any(arr[:, 0] > arr[:, 1]):
                raise ValidationError(f"H{dim}: every pair needs birth <= death")
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            clean[int(dim)] = arr[order]
        object.__setattr__(self, "pairs", clean)

    def __getitem__(self, dim):
        return self.pairs.get(int(dim), np.empty((0, 2)))

    @property
    def dims(self):
        return sorted(self.pairs)

    def finite(self, dim):
        pts = self[dim]
        return pts[np.isfinite(pts[:, 1])]

    def essential(self, dim):
        pts = self[dim]
        return pts[~np.isfinite(pts[:, 1])]

    def cap_essential(self, cap):
        """Copy with infinite deaths replaced by ``cap``."""
        out = {}
        for dim, pts in self.pairs.items():
            pts = pts.copy()
            pts[~np.isfinite(pts[:, 1]), 1] = cap
            out[dim] = pts
        return PersistenceDiagram(out)

    def max_finite_death(self):
        deaths = [self.finite(d)[:, 1] for d in self.dims]
        deaths = np.concatenate(deaths) if deaths else np.empty(0)
        return float(deaths.max()) if deaths.size else None

    def to_csv(self, path=None):
        """``dim,birth,death`` rows with ``inf`` for essential classes."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dim", "birth", "death"])
        for dim in self.dims:
            for b, d in self.pairs[dim]:
                writer.writerow([dim, repr(float(b)), "inf" if math.isinf(d) else repr(float(d))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source, dims=None):
        if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source
                                                 and Path(source).is_file()):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["dim", "birth", "death"]:
            raise ValidationError("diagram CSV must start with the header dim,birth,death")
        pairs = {int(d): [] for d in (dims or [])}
        for lineno, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            try:
                dim, b, d = int(row[0]), float(row[1]), float(row[2])
            except (ValueError, IndexError):
                raise ValidationError(f"diagram CSV line {lineno} is malformed") from None
            pairs.setdefault(dim, []).append((b, d))
        return cls(pairs)


def persistence_diagram(fc, max_hom_dim=None, keep_zero=False):
    """Persistence diagram of a filtered complex in dimensions ``0..max_hom_dim``.

    ``max_hom_dim`` defaults to ``fc.max_dim - 1``, the highest dimension
    whose classes can die inside the complex. Pairs with ``birth == death``
    are dropped unless ``keep_zero``.
    """
    if max_hom_dim is None:
        max_hom_dim = max(fc.max_dim - 1, 0)
    if max_hom_dim > fc.max_dim - 1 and max_hom_dim > 0:
        warnings.warn(f"H{max_hom_dim} classes cannot die in a complex of dimension "
                      f"{fc.max_dim}; they will all be reported as essential",
                      RuntimeWarning, stacklevel=2)
    B = boundary_matrix(fc)
    result = reduce_and_pair(B)
    values = fc.values
    dims = B.dims
    out = {d: [] for d in range(max_hom_dim + 1)}
    for c, d in result.pairs:
        j = int(dims[c])
        if j <= max_hom_dim and (keep_zero or values[d] > values[c]):
            out[j].append((values[c], values[d]))
    for c in result.essential:
        j = int(dims[c])
        if j <= max_hom_dim:
            out[j].append((values[c], np.inf))
    return PersistenceDiagram(out)


def betti_at(source, delta):
    """Betti numbers at scale ``delta``: pairs with ``birth <= delta < death``.

    ``source`` is a :class:`PersistenceDiagram` or a :class:`FilteredComplex`
    (whose diagram is then computed in every dimension it contains).
    """
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    if isinstance(source, FilteredComplex):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            source = persistence_diagram(source, source.max_dim)
    top = max(source.dims, default=0)
    betti = []
    for d in range(top + 1):
        pts = source[d]
        betti.append(int(np.count_nonzero((pts[:, 0] <= delta) & (delta < pts[:, 1]))))
    return tuple(betti)


def _rank_f2(M):
    """Rank of a 0/1 matrix over F2 by Gaussian elimination."""
    M = (np.asarray(M, dtype=np.uint8) & 1).copy()
    rows, cols = M.shape
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        hits = np.nonzero(M[rank:, c])[0]
        if hits.size == 0:
            continue
        p = rank + hits[0]
        if p != rank:
            M[[rank, p]] = M[[p, rank]]
        below = np.nonzero(M[:, c])[0]
        below = below[below != rank]
        M[below] ^= M[rank]
        rank += 1
    return rank


def betti_bruteforce(simplices, max_dim=None):
    """Betti numbers of a simplicial complex by rank computations over F2.

    ``b_j = (#j-simplices - rank d_j) - rank d_{j+1}``. Independent of the
    persistence reduction; meant for small complexes (<= 2000 simplices).
    """
    simplices = sorted({tuple(s) for s in simplices}, key=lambda s: (len(s), s))
    if len(simplices) > BRUTEFORCE_MAX_SIMPLICES:
        raise ValidationError(f"oracle limited to {BRUTEFORCE_MAX_SIMPLICES} simplices, "
                              f"got {len(simplices)}")
    by_dim = {}
    for s in simplices:
        by_dim.setdefault(len(s) - 1, []).append(s)
    if max_dim is None:
        max_dim = max(by_dim, default=0)
    ranks = {}
    for j in range(1, max_dim + 2):
        rows = by_dim.get(j - 1, [])
        cols = by_dim.get(j, [])
        if not rows or not cols:
            ranks[j] = 0
            continue
        row_index = {s: i for i, s in enumerate(rows)}
        M = np.zeros((len(rows), len(cols)), dtype=np.uint8)
        for k, s in enumerate(cols):
            for i in range(len(s)):
                M[row_index[s[:i] + s[i + 1:]], k] = 1
        ranks[j] = _rank_f2(M)
    return tuple(len(by_dim.get(j, [])) - ranks.get(j, 0) - ranks.get(j + 1, 0)
                 for j in range(max_dim + 1))


@dataclass(frozen=True)
class Bar:
    dim: int
    birth: float
    death: float  # drawn end; equals the cap for essential classes
    essential: bool = False


def barcode_of(diagram, cap=None):
    """Bars sorted by (dimension, birth, death); essential bars are drawn to ``cap``.

    ``cap`` defaults to 1.05 times the largest finite death.
    """
    top = diagram.max_finite_death()
    if cap is None:
        if top is not None and top > 0:
            cap = 1.05 * top
        else:
            births = [diagram[d][:, 0].max() for d in diagram.dims if len(diagram[d])]
            cap = 1.05 * max(births) if births and max(births) > 0 else 1.0
    elif top is not None and cap < top:
        raise ValidationError(f"cap {cap} is below the largest finite death {top}")
    bars = []
    for dim in diagram.dims:
        for b, d in diagram[dim]:
            if math.isinf(d):
                bars.append(Bar(dim, float(b), float(cap), True))
            else:
                bars.append(Bar(dim, float(b), float(d), False))
    bars.sort(key=lambda bar: (bar.dim, bar.birth, bar.death))
    return bars


class RipsPersistence(BaseEstimator, TransformerMixin):
    """Point clouds in, Vietoris-Rips persistence diagrams out.

    Parameters
    ----------
    max_dim : int
        Largest simplex dimension; diagrams cover ``0..max_dim-1``.
    max_scale : float or None
        Filtration cut-off; ``None`` uses half the largest pairwise distance.
    max_points : int or None
        Larger clouds are reduced to this many maxmin landmarks first.
    cap_essential : bool
        Replace infinite deaths by the filtration cut-off, as classes alive
        at the cut-off are only known to outlive it.
    """

    def __init__(self, max_dim=3, max_scale=None, max_points=200, keep_zero=False,
                 cap_essential=False):
        self.max_dim = max_dim
        self.max_scale = max_scale
        self.max_points = max_points
        self.keep_zero = keep_zero
        self.cap_essential = cap_essential

    def fit(self, X=None, y=None):
        return self

    def _one(self, cloud):
        X = check_point_cloud(cloud)
        if self.max_points is not None and X.shape[0] > self.max_points:
            X = X[maxmin_subsample(X, self.max_points)]
        D = distance_matrix(X)
        scale = self.max_scale if self.max_scale is not None else default_max_scale(D)
        if not scale > 0:
            scale = np.inf
        fc = rips_filtration(D, self.max_dim, scale)
        dgm = persistence_diagram(fc, max(self.max_dim - 1, 0), self.keep_zero)
        if self.cap_essential and np.isfinite(scale):
            dgm = dgm.cap_essential(scale)
        return dgm

    def transform(self, X):
        return [self._one(cloud) for cloud in X]
