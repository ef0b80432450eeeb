"""Neighbourhood graphs and graph geodesics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial.distance import cdist

from .._validation import ComputeError, ValidationError, check_point_cloud

__all__ = [
    "NeighborhoodParams",
    "WeightedGraph",
    "DisconnectedGraphError",
    "knn_graph",
    "graph_geodesics",
    "largest_component",
]


class DisconnectedGraphError(ComputeError):
    def __init__(self, sizes):
        self.sizes = tuple(int(s) for s in sizes)
        shown = ",".join(str(s) for s in self.sizes[:10]) + (",..." if len(self.sizes) > 10 else "")
        super().__init__(f"graph is disconnected: {len(self.sizes)} components ({shown})")


@dataclass(frozen=True)
class NeighborhoodParams:
    n_neighbors: int = 10
    epsilon: float = np.inf

    def __post_init__(self):
        if int(self.n_neighbors) != self.n_neighbors or self.n_neighbors < 1:
            raise ValidationError(f"n_neighbors must be >= 1, got {self.n_neighbors!r}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon!r}")


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph; ``edges`` rows are ``(i, j)`` with ``i < j``."""

    n_vertices: int
    edges: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if edges.shape[0] != weights.size:
            raise ValidationError("one weight per edge required")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValidationError("self-loops are not allowed")
        if np.any(edges < 0) or np.any(edges >= self.n_vertices):
            raise ValidationError("edge endpoint out of range")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValidationError("edge weights must be finite and non-negative")
        edges = np.sort(edges, axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        object.__setattr__(self, "edges", edges[order])
        object.__setattr__(self, "weights", weights[order])

    def to_sparse(self):
        """Symmetric CSR adjacency holding the weights."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        data = np.concatenate([self.weights, self.weights])
        return coo_matrix((data, (rows, cols)), shape=(self.n_vertices,) * 2).tocsr()

    def components(self):
        """Component label per vertex, labels ordered by first vertex."""
        # explicit zeros in sparse matrices are dropped, so connectivity uses a
        # unit-weight copy
        i, j = self.edges[:, 0], self.edges[:, 1]
        ones = np.ones(2 * len(i))
        adj = coo_matrix((ones, (np.concatenate([i, j]), np.concatenate([j, i]))),
                         shape=(self.n_vertices,) * 2).tocsr()
        _, labels = connected_components(adj, directed=False)
        return labels


def knn_graph(cloud, params=NeighborhoodParams()):
    """Union-symmetrised K-nearest-neighbour graph restricted to an epsilon ball.

    Vertex ``i`` links to its ``K`` nearest points among those within
    ``epsilon``; ties are broken by the lower index. Edge weights are
    Euclidean distances. ``K`` larger than ``n - 1`` is clamped with a warning.
    """
    X = check_point_cloud(cloud, min_points=2)
    n = X.shape[0]
    k = int(params.n_neighbors)
    if k > n - 1:
        warnings.warn(f"n_neighbors={k} exceeds n-1={n - 1}; clamped to {n - 1}",
                      RuntimeWarning, stacklevel=2)
        k = n - 1
    D = cdist(X, X)
    np.fill_diagonal(D, np.inf)
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = order.ravel()
    keep = D[rows, cols] <= params.epsilon
    rows, cols = rows[keep], cols[keep]

    isolated = np.setdiff1d(np.arange(n), rows)
    if isolated.size:
        warnings.warn(f"{isolated.size} vertices have no neighbour within epsilon="
                      f"{params.epsilon}; graph may be disconnected", RuntimeWarning, stacklevel=2)

    pairs = np.unique(np.sort(np.column_stack([rows, cols]), axis=1), axis=0)
    return WeightedGraph(n, pairs, D[pairs[:, 0], pairs[:, 1]] if pairs.size else np.empty(0))


def largest_component(graph):
    """Restrict ``graph`` to its largest component; returns (subgraph, kept vertex indices)."""
    labels = graph.components()
    sizes = np.bincount(labels)
    keep = np.nonzero(labels == np.argmax(sizes))[0]
    remap = -np.ones(graph.n_vertices, dtype=np.intp)
    remap[keep] = np.arange(keep.size)
    mask = (remap[graph.edges[:, 0]] >= 0) & (remap[graph.edges[:, 1]] >= 0)
    sub = WeightedGraph(keep.size, remap[graph.edges[mask]], graph.weights[mask])
    return sub, keep


def graph_geodesics(graph):
    """All-pairs weighted shortest-path distances (Dijkstra).

    Raises
    ------
    DisconnectedGraphError
        When the graph has more than one component; use
        :func:`largest_component` first to opt into dropping vertices.
    """
    labels = graph.components()
    sizes = np.bincount(labels)
    if sizes.size > 1:
        raise DisconnectedGraphError(sizes)
    D = shortest_path(graph.to_sparse(), method="D", directed=False)
    return 0.5 * (D + D.T)
