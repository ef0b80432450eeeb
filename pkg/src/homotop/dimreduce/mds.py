from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_distance_matrix, check_positive_int
from ._base import Embedding, fix_signs

__all__ = ["classical_mds", "ClassicalMDS"]


def classical_mds(D, n_components=2, method="mds"):
    """Classical (Torgerson) multidimensional scaling.

    Double-centres the squared distances, ``B = -1/2 J (D*D) J``, and scales
    the top eigenvectors by the square roots of their eigenvalues. Negative
    eigenvalues are treated as zero; if fewer than ``n_components``
    eigenvalues are positive the remaining coordinates are zero.
    """
    D = check_distance_matrix(D)
    m = check_positive_int(n_components, "n_components")
    n = D.shape[0]
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D ** 2) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], fix_signs(evecs[:, order])

    scale = max(np.abs(evals).max(), 1e-300)
    if evals[-1] < -1e-9 * scale:
        warnings.warn("distance matrix is not Euclidean: negative eigenvalues truncated to zero",
                      RuntimeWarning, stacklevel=2)
    positive = int(np.sum(evals > 1e-12 * scale))
    if m > positive:
        warnings.warn(f"only {positive} positive eigenvalues; padding "
                      f"{m - positive} coordinates with zeros", RuntimeWarning, stacklevel=2)
    k = min(m, n)
    lam = np.clip(evals[:k], 0.0, None)
    lam[positive:] = 0.0
    coords = np.zeros((n, m))
    coords[:, :k] = evecs[:, :k] * np.sqrt(lam)
    return Embedding(coords, method, {"n_components": m})


class ClassicalMDS(BaseEstimator, TransformerMixin):
    """Classical MDS on a precomputed distance matrix (``fit_transform`` only)."""

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        self.embedding_ = classical_mds(X, self.n_components).coords
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
