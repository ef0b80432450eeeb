from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_point_cloud
from ._base import Embedding
from .graph import NeighborhoodParams, graph_geodesics, knn_graph, largest_component
from .mds import classical_mds

__all__ = ["isomap", "Isomap"]


def isomap(cloud, params=NeighborhoodParams(), n_components=2, largest_only=False):
    """Isomap: neighbourhood graph, graph geodesics, then classical MDS.

    A disconnected neighbourhood graph is an error unless ``largest_only``
    is set, in which case only the largest component is embedded and the
    kept rows are recorded in ``Embedding.support``.
    """
    X = check_point_cloud(cloud, min_points=2)
    graph = knn_graph(X, params)
    support = None
    if largest_only:
        graph, support = largest_component(graph)
        if support.size == X.shape[0]:
            support = None
    D = graph_geodesics(graph)
    emb = classical_mds(D, n_components)
    echo = {"n_neighbors": params.n_neighbors, "epsilon": str(params.epsilon),
            "n_components": n_components, "largest_only": largest_only}
    return Embedding(emb.coords, "isomap", echo, support)


class Isomap(BaseEstimator, TransformerMixin):
    def __init__(self, n_neighbors=10, epsilon=float("inf"), n_components=2, largest_only=False):
        self.n_neighbors = n_neighbors
        self.epsilon = epsilon
        self.n_components = n_components
        self.largest_only = largest_only

    def fit(self, X, y=None):
        emb = isomap(X, NeighborhoodParams(self.n_neighbors, self.epsilon),
                     self.n_components, self.largest_only)
        self.embedding_ = emb.coords
        self.support_ = emb.support
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
