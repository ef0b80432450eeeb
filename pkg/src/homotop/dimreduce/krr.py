"""Kernel ridge regression in dual form, and a regression-based reducer."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin

from .._validation import ComputeError, ValidationError, check_point_cloud, check_positive_int
from ._base import Embedding, fix_signs

__all__ = [
    "KRRModel",
    "kernel_matrix",
    "krr_fit",
    "krr_predict",
    "krr_reduce",
    "KernelRidge",
    "KRRReducer",
]

KERNELS = ("linear", "gaussian")


def kernel_matrix(A, B, kernel="gaussian", sigma=1.0):
    """``x.y`` for the linear kernel, ``exp(-sigma |x - y|^2)`` for the Gaussian one."""
    if kernel == "linear":
        return A @ B.T
    if kernel == "gaussian":
        return np.exp(-sigma * cdist(A, B, "sqeuclidean"))
    raise ValidationError(f"unknown kernel {kernel!r}; choose from {KERNELS}")


@dataclass(frozen=True)
class KRRModel:
    inputs: np.ndarray
    dual_coef: np.ndarray  # (K + lam I)^{-1} u
    kernel: str
    sigma: float
    lam: float

    @property
    def n_features(self):
        return self.inputs.shape[1]


def krr_fit(inputs, targets, kernel="gaussian", lam=1e-3, sigma=1.0):
    """Solve ``(K + lam I) a = u`` for the dual coefficients.

    ``lam = 0`` is accepted only when the kernel matrix is non-singular.
    ``targets`` may be 2-D (one column per output).
    """
    X = check_point_cloud(inputs, name="KRR inputs")
    u = np.asarray(targets, dtype=np.float64)
    if u.shape[0] != X.shape[0]:
        raise ValidationError(f"{u.shape[0]} targets for {X.shape[0]} inputs")
    if lam < 0:
        raise ValidationError("lam must be >= 0")
    if kernel == "gaussian" and not sigma > 0:
        raise ValidationError("sigma must be > 0 for the Gaussian kernel")
    K = kernel_matrix(X, X, kernel, sigma)
    A = K + lam * np.eye(X.shape[0])
    if lam == 0:
        evals = np.linalg.eigvalsh(0.5 * (A + A.T))
        if evals[0] <= 1e-12 * max(abs(evals[-1]), 1e-300):
            raise ComputeError("kernel matrix is singular at lam=0; use lam > 0")
    try:
        a = scipy.linalg.solve(A, u, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ComputeError(f"cannot solve (K + lam I) a = u: {exc}; use a larger lam") from exc
    return KRRModel(X, a, kernel, float(sigma), float(lam))


def krr_predict(model, query):
    """Dual-form prediction ``a . kappa(query)``; scalar for a single query point."""
    q = np.asarray(query, dtype=np.float64)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    if q.shape[1] != model.n_features:
        raise ValidationError(
            f"query has {q.shape[1]} features, model was fit on {model.n_features}")
    pred = kernel_matrix(q, model.inputs, model.kernel, model.sigma) @ model.dual_coef
    if single:
        return float(pred[0]) if np.ndim(pred[0]) == 0 else pred[0]
    return pred


def _median_sigma(X):
    """Gaussian width ``1 / median squared pairwise distance``."""
    d2 = cdist(X, X, "sqeuclidean")
    d2 = d2[np.triu_indices_from(d2, k=1)]
    med = np.median(d2[d2 > 0]) if np.any(d2 > 0) else 1.0
    return 1.0 / med


def krr_reduce(cloud, n_components=3, kernel="gaussian", lam=1e-3, sigma=None):
    """Reduce by principal rotation plus kernel-ridge regression of the dropped axes.

    The cloud is centred and rotated onto its principal axes. The first
    ``n_components`` rotated coordinates form the embedding. Every dropped
    axis ``i`` is regressed by KRR on the axes before it; its residual is
    the part the retained coordinates cannot explain and is reported in
    ``info["residual_variance"]``. The fitted regressions are kept in
    ``info["models"]`` for reconstruction.
    """
    X = check_point_cloud(cloud, min_points=2)
    m = check_positive_int(n_components, "n_components")
    n, d = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    C = Xc.T @ Xc / n
    evals, evecs = np.linalg.eigh(0.5 * (C + C.T))
    order = np.argsort(evals)[::-1]
    rotation = fix_signs(evecs[:, order])
    Z = Xc @ rotation

    if m >= d:
        warnings.warn(f"n_components={m} >= ambient dimension {d}; nothing to regress, "
                      f"returning the principal rotation (zero-padded)", RuntimeWarning,
                      stacklevel=2)
        coords = np.hstack([Z, np.zeros((n, m - d))])
        echo = {"n_components": m, "kernel": kernel, "lam": lam, "sigma": sigma}
        return Embedding(coords, "krr", echo,
                         info={"rotation": rotation, "mean": mean, "models": [],
                               "residual_variance": np.zeros(0)})

    models, residual_var = [], []
    for i in range(m, d):
        inputs = Z[:, :i]
        s = _median_sigma(inputs) if sigma is None else sigma
        model = krr_fit(inputs, Z[:, i], kernel, lam, s)
        residual = Z[:, i] - krr_predict(model, inputs)
        models.append(model)
        residual_var.append(float(np.mean(residual ** 2)))
    echo = {"n_components": m, "kernel": kernel, "lam": lam, "sigma": sigma}
    return Embedding(Z[:, :m], "krr", echo,
                     info={"rotation": rotation, "mean": mean, "models": models,
                           "residual_variance": np.array(residual_var)})


class KernelRidge(BaseEstimator, RegressorMixin):
    def __init__(self, kernel="gaussian", lam=1e-3, sigma=1.0):
        self.kernel = kernel
        self.lam = lam
        self.sigma = sigma

    def fit(self, X, y):
        self.model_ = krr_fit(X, y, self.kernel, self.lam, self.sigma)
        self.dual_coef_ = self.model_.dual_coef
        return self

    def predict(self, X):
        return krr_predict(self.model_, np.atleast_2d(X))


class KRRReducer(BaseEstimator, TransformerMixin):
    """Transformer wrapper for :func:`krr_reduce`; ``inverse_transform`` rebuilds dropped axes."""

    def __init__(self, n_components=3, kernel="gaussian", lam=1e-3, sigma=None):
        self.n_components = n_components
        self.kernel = kernel
        self.lam = lam
        self.sigma = sigma

    def fit(self, X, y=None):
        emb = krr_reduce(X, self.n_components, self.kernel, self.lam, self.sigma)
        self.embedding_ = emb.coords
        self.rotation_ = emb.info["rotation"]
        self.mean_ = emb.info["mean"]
        self.models_ = emb.info["models"]
        self.residual_variance_ = emb.info["residual_variance"]
        return self

    def transform(self, X):
        X = check_point_cloud(X)
        Z = (X - self.mean_) @ self.rotation_
        m = min(self.n_components, Z.shape[1])
        out = np.zeros((Z.shape[0], self.n_components))
        out[:, :m] = Z[:, :m]
        return out

    def inverse_transform(self, Y):
        Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
        d = self.rotation_.shape[0]
        Z = np.zeros((Y.shape[0], d))
        m = min(self.n_components, d)
        Z[:, :m] = Y[:, :m]
        for offset, model in enumerate(self.models_):
            i = m + offset
            Z[:, i] = krr_predict(model, Z[:, :i])
        return Z @ self.rotation_.T + self.mean_
