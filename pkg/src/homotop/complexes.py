"""Vietoris-Rips filtrations, a small-scale Čech oracle, and filtration checks.

Simplices are tuples of strictly increasing vertex indices. A simplex of a
Rips filtration enters at the largest pairwise distance among its vertices
(closed balls: a pair at distance exactly ``delta`` is connected at ``delta``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from ._validation import ValidationError, check_distance_matrix, check_point_cloud

__all__ = [
    "FilteredComplex",
    "FiltrationReport",
    "rips_filtration",
    "cech_snapshot",
    "minimum_enclosing_radius",
    "validate_filtration",
    "maxmin_subsample",
    "default_max_scale",
    "distance_matrix",
]

CECH_MAX_POINTS = 64


def _check_simplex(simplex):
    s = tuple(int(v) for v in simplex)
    if not s or any(a >= b for a, b in zip(s, s[1:])) or s[0] < 0:
        raise ValidationError(f"simplex {simplex!r} must list strictly increasing vertex indices")
    return s


@dataclass(frozen=True)
class FilteredComplex:
    """Simplices with entry values, stored in filtration order.

    Order is by (value, dimension, lexicographic vertices), which places
    faces before cofaces in any valid filtration.
    """

    simplices: tuple
    values: np.ndarray
    max_dim: int
    max_scale: float = np.inf

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.simplices),):
            raise ValidationError("one filtration value per simplex required")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_simplices(cls, pairs, max_dim=None, max_scale=np.inf):
        """Build from ``(simplex, value)`` pairs in any order; sorts into filtration order."""
        pairs = [(_check_simplex(s), float(v)) for s, v in pairs]
        pairs.sort(key=lambda sv: (sv[1], len(sv[0]), sv[0]))
        simplices = tuple(s for s, _ in pairs)
        values = np.array([v for _, v in pairs], dtype=np.float64)
        if max_dim is None:
            max_dim = max((len(s) - 1 for s in simplices), default=0)
        return cls(simplices, values, int(max_dim), float(max_scale))

    def __len__(self):
        return len(self.simplices)

    def __iter__(self):
        return zip(self.simplices, self.values)

    @property
    def dims(self):
        return np.fromiter((len(s) - 1 for s in self.simplices), dtype=np.intp,
                           count=len(self.simplices))

    @property
    def n_vertices(self):
        return sum(1 for s in self.simplices if len(s) == 1)

    def snapshot(self, delta):
        """Simplices present at scale ``delta`` (value <= delta)."""
        return [s for s, v in zip(self.simplices, self.values) if v <= delta]

    def to_text(self, path=None):
        """Lines ``delta dim v0 v1 ...`` in filtration order."""
        lines = [" ".join([repr(float(v)), str(len(s) - 1)] + [str(x) for x in s])
                 for s, v in zip(self.simplices, self.values)]
        text = "\n".join(lines) + ("\n" if lines else "")
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_text(cls, source, max_scale=np.inf):
        if isinstance(source, Path) or ("\n" not in source and Path(source).is_file()):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source
        pairs = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split()
            try:
                value, dim, verts = float(parts[0]), int(parts[1]), [int(x) for x in parts[2:]]
            except (ValueError, IndexError):
                raise ValidationError(f"filtration line {lineno} is malformed: {line!r}") from None
            if len(verts) != dim + 1:
                raise ValidationError(f"filtration line {lineno}: dim {dim} but "
                                      f"{len(verts)} vertices")
            pairs.append((verts, value))
        return cls.from_simplices(pairs, max_scale=max_scale)


def default_max_scale(D):
    """Half of the largest pairwise distance."""
    return 0.5 * float(np.max(D)) if np.size(D) else 0.0


def rips_filtration(D, max_dim=3, max_scale=np.inf):
    """Vietoris-Rips filtration of a distance matrix up to ``max_dim`` and ``max_scale``.

    Parameters
    ----------
    D : (n, n) array
        Distance matrix; use ``squareform(pdist(X))`` for a point cloud.
    max_dim : int in {0, 1, 2, 3}
    max_scale : float
        Simplices entering above this value are omitted.
    """
    D = check_distance_matrix(D)
    if max_dim not in (0, 1, 2, 3):
        raise ValidationError(f"max_dim must be 0, 1, 2 or 3, got {max_dim!r}")
    if not max_scale > 0:
        raise ValidationError(f"max_scale must be > 0, got {max_scale!r}")
    n = D.shape[0]

    blocks_s = [np.arange(n)[:, None]]
    blocks_v = [np.zeros(n)]
    if max_dim >= 1:
        upper = np.triu(D <= max_scale, k=1)
        ei, ej = np.nonzero(upper)
        edges = np.column_stack([ei, ej])
        blocks_s.append(edges)
        blocks_v.append(D[ei, ej])
        faces = edges
        for _ in range(2, max_dim + 1):
            cols = []
            for face in faces:
                common = np.logical_and.reduce(upper[face], axis=0)
                tails = np.nonzero(common)[0]
                if tails.size == 0:
                    continue
                cols.append(np.column_stack([np.broadcast_to(face, (tails.size, face.size)),
                                             tails]))
            if not cols:
                break
            faces = np.vstack(cols)
            sub = D[faces[:, :, None], faces[:, None, :]]
            vals = sub.reshape(len(faces), -1).max(axis=1)
            blocks_s.append(faces)
            blocks_v.append(vals)

    simplices, values, dims, padded = [], [], [], []
    for block, vals in zip(blocks_s, blocks_v):
        k = block.shape[1]
        simplices.extend(map(tuple, block.tolist()))
        values.append(vals)
        dims.append(np.full(len(block), k - 1))
        padded.append(np.hstack([block, -np.ones((len(block), 4 - k), dtype=block.dtype)]))
    values = np.concatenate(values)
    dims = np.concatenate(dims)
    padded = np.vstack(padded)
    order = np.lexsort((padded[:, 3], padded[:, 2], padded[:, 1], padded[:, 0], dims, values))
    return FilteredComplex(tuple(simplices[i] for i in order), values[order], max_dim,
                           float(max_scale))


def minimum_enclosing_radius(points, rtol=1e-12):
    """Radius of the smallest ball containing a handful of points (exhaustive)."""
    P = np.asarray(points, dtype=np.float64)
    k = P.shape[0]
    if k == 1:
        return 0.0
    scale = float(np.max(pdist(P)))
    if scale == 0:
        return 0.0
    best = np.inf
    for size in range(2, k + 1):
        for subset in itertools.combinations(range(k), size):
            S = P[list(subset)]
            A = S[1:] - S[0]
            G = A @ A.T
            if abs(np.linalg.det(G)) <= 1e-14 * scale ** (2 * (size - 1)):
                continue
            lam = np.linalg.solve(G, 0.5 * np.diag(G))
            center = S[0] + lam @ A
            r = float(np.linalg.norm(S[0] - center))
            if r < best and np.all(np.linalg.norm(P - center, axis=1) <= r * (1 + rtol) + 1e-15):
                best = r
    return best


def cech_snapshot(cloud, delta, max_dim=2, rtol=1e-12):
    """Čech complex at scale ``delta``: simplices whose vertices fit in a ball of radius ``delta/2``.

    Exhaustive oracle for small clouds (at most 64 points).
    """
    X = check_point_cloud(cloud)
    n = X.shape[0]
    if n > CECH_MAX_POINTS:
        raise ValidationError(f"Čech oracle limited to {CECH_MAX_POINTS} points, got {n}")
    if max_dim not in (0, 1, 2, 3):
        raise ValidationError(f"max_dim must be 0..3, got {max_dim!r}")
    limit = 0.5 * delta * (1 + rtol)
    result = {(i,) for i in range(n)}
    layer = [(i,) for i in range(n)]
    for _ in range(max_dim):
        nxt = []
        for s in layer:
            for v in range(s[-1] + 1, n):
                cand = s + (v,)
                if any(cand[:j] + cand[j + 1:] not in result for j in range(len(cand) - 1)):
                    continue
                if minimum_enclosing_radius(X[list(cand)]) <= limit:
                    nxt.append(cand)
        result.update(nxt)
        layer = nxt
    return result


@dataclass(frozen=True)
class FiltrationReport:
    ok: bool
    kind: str = ""  # "closure", "monotonicity" or "order"
    face: tuple = ()
    coface: tuple = ()

    def __bool__(self):
        return self.ok

    @property
    def message(self):
        if self.ok:
            return "ok"
        return f"{self.kind} violated: face {self.face} of coface {self.coface}"


def validate_filtration(fc):
    """Check closure, face <= coface monotonicity and faces-first ordering.

    Returns a :class:`FiltrationReport` naming the first offending pair.
    """
    position = {}
    for idx, (s, _) in enumerate(fc):
        position[s] = idx
    values = fc.values
    for idx, (s, value) in enumerate(fc):
        if len(s) == 1:
            continue
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            at = position.get(face)
            if at is None:
                return FiltrationReport(False, "closure", face, s)
            if values[at] > value:
                return FiltrationReport(False, "monotonicity", face, s)
            if at > idx:
                return FiltrationReport(False, "order", face, s)
    return FiltrationReport(True)


def maxmin_subsample(cloud, n_points, start=0):
    """Greedy farthest-point landmarks; deterministic, ties to the lower index."""
    X = check_point_cloud(cloud)
    n = X.shape[0]
    if n_points >= n:
        return np.arange(n)
    chosen = [int(start)]
    dist = cdist(X[[start]], X)[0]
    for _ in range(1, n_points):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, cdist(X[[nxt]], X)[0])
    return np.sort(np.array(chosen))


def distance_matrix(cloud):
    """Euclidean distance matrix of a point cloud."""
    return squareform(pdist(check_point_cloud(cloud)))
