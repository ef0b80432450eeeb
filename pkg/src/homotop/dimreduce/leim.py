"""Laplacian eigenmaps."""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import ValidationError, check_point_cloud, check_positive_int
from ._base import Embedding, fix_signs
from .graph import DisconnectedGraphError, NeighborhoodParams, knn_graph

__all__ = [
    "heat_kernel_weights",
    "graph_laplacian",
    "laplacian_eigenmaps",
    "leim_objective",
    "LaplacianEigenmaps",
]


def heat_kernel_weights(graph, sigma):
    """Dense adjacency ``w_ij = exp(-|v_i - v_j|^2 / (2 sigma^2))`` on graph edges, 0 elsewhere."""
    W = np.zeros((graph.n_vertices, graph.n_vertices))
    w = np.exp(-graph.weights ** 2 / (2.0 * sigma ** 2))
    i, j = graph.edges[:, 0], graph.edges[:, 1]
    W[i, j] = w
    W[j, i] = w
    return W


def graph_laplacian(W):
    """Return ``(L, degree)`` with ``L = diag(degree) - W``."""
    degree = W.sum(axis=1)
    return np.diag(degree) - W, degree


def leim_objective(W, Y):
    """Sum of ``w_ij |y_i - y_j|^2`` over unordered pairs ``i < j``."""
    Y = np.asarray(Y, dtype=np.float64)
    diff = Y[:, None, :] - Y[None, :, :]
    return 0.5 * float(np.sum(W * np.sum(diff ** 2, axis=-1)))


def laplacian_eigenmaps(cloud, params=NeighborhoodParams(), sigma=None, n_components=2):
    """Embed with the generalised eigenproblem ``L y = mu D y``.

    The neighbourhood graph is symmetrised by union so that ``i`` is a
    neighbour of ``j`` exactly when ``j`` is a neighbour of ``i``. With
    ``sigma=None`` the heat-kernel width is the median edge length.
    The constant eigenvector (eigenvalue 0) is skipped.
    """
    X = check_point_cloud(cloud, min_points=2)
    m = check_positive_int(n_components, "n_components")
    n = X.shape[0]
    if m > n - 1:
        raise ValidationError(f"n_components={m} needs at least {m + 1} points")
    graph = knn_graph(X, params)
    if sigma is None:
        positive = graph.weights[graph.weights > 0]
        sigma = float(np.median(positive)) if positive.size else 1.0
    W = heat_kernel_weights(graph, sigma)
    # weights that underflow to zero act as missing edges
    n_comp, labels = connected_components(W > 0, directed=False)
    if n_comp > 1:
        raise DisconnectedGraphError(np.bincount(labels))
    L, degree = graph_laplacian(W)
    evals, evecs = scipy.linalg.eigh(L, np.diag(degree))
    coords = fix_signs(evecs[:, 1:m + 1])
    echo = {"n_neighbors": params.n_neighbors, "epsilon": str(params.epsilon),
            "sigma": sigma, "n_components": m}
    return Embedding(coords, "leim", echo, info={"eigenvalues": evals[1:m + 1]})


class LaplacianEigenmaps(BaseEstimator, TransformerMixin):
    def __init__(self, n_neighbors=10, epsilon=float("inf"), sigma=None, n_components=2):
        self.n_neighbors = n_neighbors
        self.epsilon = epsilon
        self.sigma = sigma
        self.n_components = n_components

    def fit(self, X, y=None):
        emb = laplacian_eigenmaps(X, NeighborhoodParams(self.n_neighbors, self.epsilon),
                                  self.sigma, self.n_components)
        self.embedding_ = emb.coords
        self.eigenvalues_ = emb.info["eigenvalues"]
        self.sigma_ = emb.params["sigma"]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_

