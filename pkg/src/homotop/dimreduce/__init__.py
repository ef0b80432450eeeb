"""Dimension-reduction methods and their shared primitives.

Every method is available both as a function returning an
:class:`Embedding` and as a scikit-learn compatible estimator.
"""

from .._validation import ValidationError
from ._base import Embedding, MethodParams, param_hash
from .graph import (DisconnectedGraphError, NeighborhoodParams, WeightedGraph, graph_geodesics,
                    knn_graph, largest_component)
from .ica import FastICA, ICAConvergenceError, ICAResult, Whitening, fastica, fastica_extract, whiten
from .isomap import Isomap, isomap
from .krr import KernelRidge, KRRModel, KRRReducer, kernel_matrix, krr_fit, krr_predict, krr_reduce
from .leim import LaplacianEigenmaps, graph_laplacian, laplacian_eigenmaps, leim_objective
from .mds import ClassicalMDS, classical_mds
from .tsne import TSNE, PerplexityError, tsne

METHODS = ("isomap", "krr", "fastica", "leim", "tsne")


def reduce(cloud, method, params=MethodParams(), seed=None):
    """Run one named method with a shared :class:`MethodParams`."""
    nbr = NeighborhoodParams(params.n_neighbors, params.epsilon)
    m = params.n_components
    if method == "isomap":
        return isomap(cloud, nbr, m)
    if method == "leim":
        return laplacian_eigenmaps(cloud, nbr, params.sigma, m)
    if method == "fastica":
        return fastica(cloud, m, params.contrast, params.alpha, params.sigma or 1.0, seed,
                       params.tol, params.max_iter, params.strict)
    if method == "krr":
        return krr_reduce(cloud, m, params.kernel, params.lam, params.sigma)
    if method == "tsne":
        return tsne(cloud, m, params.perplexity, params.learning_rate, params.n_iter,
                    momentum_switch=params.momentum_switch, symmetrize=params.symmetrize,
                    seed=seed)
    raise ValidationError(f"unknown method {method!r}; choose from {METHODS}")


__all__ = [
    "METHODS", "reduce", "Embedding", "MethodParams", "param_hash",
    "NeighborhoodParams", "WeightedGraph", "DisconnectedGraphError", "knn_graph",
    "graph_geodesics", "largest_component", "classical_mds", "ClassicalMDS",
    "isomap", "Isomap", "laplacian_eigenmaps", "LaplacianEigenmaps", "graph_laplacian",
    "leim_objective", "whiten", "Whitening", "fastica_extract", "fastica", "FastICA",
    "ICAResult", "ICAConvergenceError", "KRRModel", "kernel_matrix", "krr_fit", "krr_predict",
    "krr_reduce", "KernelRidge", "KRRReducer", "tsne", "TSNE", "PerplexityError",
]
