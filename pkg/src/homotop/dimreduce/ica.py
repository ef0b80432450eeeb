"""Whitening and deflationary FastICA."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import (ComputeError, ValidationError, check_point_cloud,
                           check_positive_int, check_random_state_seed)
from ._base import Embedding, fix_signs

__all__ = [
    "Whitening",
    "ICAResult",
    "ICAConvergenceError",
    "CONTRASTS",
    "whiten",
    "fastica_extract",
    "fastica",
    "FastICA",
]


@dataclass(frozen=True)
class Whitening:
    """``z = (x - mean) @ matrix.T`` where ``matrix = E^{-1/2} V^T``."""

    mean: np.ndarray
    matrix: np.ndarray
    eigenvalues: np.ndarray

    def apply(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) @ self.matrix.T


@dataclass(frozen=True)
class ICAResult:
    unmixing: np.ndarray  # rows are unit-norm directions w_k in whitened space
    sources: np.ndarray  # (n_samples, n_components), s = W^T v per sample
    whitening: Whitening | None = None
    n_iter: list = field(default_factory=list)


class ICAConvergenceError(ComputeError):
    def __init__(self, component, last_iterate, deltas):
        self.component = component
        self.last_iterate = last_iterate
        self.deltas = list(deltas)
        super().__init__(f"FastICA component {component} did not converge in {len(deltas)} "
                         f"iterations (last delta {deltas[-1]:.3g})")


def whiten(cloud):
    """Centre the columns and decorrelate to identity covariance.

    Covariance uses the 1/N normalisation, so ``Z.T @ Z / N`` is the
    identity. Directions with (numerically) zero variance are dropped with
    a warning.
    """
    X = check_point_cloud(cloud, min_points=2)
    mean = X.mean(axis=0)
    Xc = X - mean
    C = Xc.T @ Xc / X.shape[0]
    evals, evecs = np.linalg.eigh(0.5 * (C + C.T))
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], fix_signs(evecs[:, order])
    if evals[0] <= 0:
        raise ValidationError("cannot whiten: all points are identical")
    keep = evals > 1e-12 * evals[0]
    if not np.all(keep):
        warnings.warn(f"dropping {np.count_nonzero(~keep)} zero-variance directions while "
                      f"whitening", RuntimeWarning, stacklevel=2)
    evals, evecs = evals[keep], evecs[:, keep]
    matrix = (evecs / np.sqrt(evals)).T
    transform = Whitening(mean, matrix, evals)
    return transform.apply(X), transform


def _logcosh(alpha):
    def G(u):
        a = np.abs(alpha * u)
        # log cosh without overflow
        return (a + np.log1p(np.exp(-2 * a)) - np.log(2.0)) / alpha

    def g(u):
        return np.tanh(alpha * u)

    def dg(u):
        t = np.tanh(alpha * u)
        return alpha * (1.0 - t * t)

    return G, g, dg


def _gauss(sigma):
    def G(u):
        return -np.exp(-0.5 * sigma * u * u) / sigma

    def g(u):
        return u * np.exp(-0.5 * sigma * u * u)

    def dg(u):
        return (1.0 - sigma * u * u) * np.exp(-0.5 * sigma * u * u)

    return G, g, dg


def _quartic():
    return (lambda u: 0.25 * u ** 4), (lambda u: u ** 3), (lambda u: 3.0 * u ** 2)


CONTRASTS = ("logcosh", "gauss", "quartic")


def _contrast(name, alpha=1.0, sigma=1.0):
    if name == "logcosh":
        return _logcosh(alpha)
    if name == "gauss":
        return _gauss(sigma)
    if name == "quartic":
        return _quartic()
    raise ValidationError(f"unknown contrast {name!r}; choose from {CONTRASTS}")


def _gaussian_expectation(G, n_nodes=80):
    nodes, weights = hermegauss(n_nodes)
    return float(np.sum(weights * G(nodes)) / np.sqrt(2 * np.pi))


def fastica_extract(whitened, n_components=None, contrast="logcosh", alpha=1.0, sigma=1.0,
                    seed=None, tol=1e-6, max_iter=1000, strict=True):
    """Extract independent directions one at a time (deflation).

    Each direction follows the fixed-point update
    ``w <- E[v g(w.v)] - E[g'(w.v)] w``, is Gram-Schmidt orthogonalised
    against the directions already found, and renormalised. A direction has
    converged once ``1 - |<w_new, w_old>| < tol``.

    Raises
    ------
    ICAConvergenceError
        If a direction is still moving after ``max_iter`` updates; the error
        carries the last iterate and the per-iteration deltas. With
        ``strict=False`` the last iterate is kept and a warning issued
        instead, which is what happens for directions that are not
        identifiable (e.g. a rotationally symmetric plane).
    """
    Z = check_point_cloud(whitened, min_points=2, name="whitened data")
    n, p = Z.shape
    k = p if n_components is None else check_positive_int(n_components, "n_components")
    if k > p:
        raise ValidationError(f"n_components={k} exceeds whitened dimension {p}")
    G, g, dg = _contrast(contrast, alpha, sigma)
    rng = check_random_state_seed(seed)

    W = np.zeros((k, p))
    iterations = []
    for c in range(k):
        w = rng.standard_normal(p)
        w -= W[:c].T @ (W[:c] @ w)
        w /= np.linalg.norm(w)
        deltas = []
        for it in range(1, max_iter + 1):
            proj = Z @ w
            w_new = (Z * g(proj)[:, None]).mean(axis=0) - dg(proj).mean() * w
            w_new -= W[:c].T @ (W[:c] @ w_new)
            norm = np.linalg.norm(w_new)
            if norm == 0:
                raise ICAConvergenceError(c, w, deltas + [np.inf])
            w_new /= norm
            delta = 1.0 - abs(float(w_new @ w))
            deltas.append(delta)
            w = w_new
            if delta < tol:
                break
        else:
            err = ICAConvergenceError(c, w, deltas)
            if strict:
                raise err
            warnings.warn(f"{err}; keeping the last iterate", RuntimeWarning, stacklevel=2)
        W[c] = w
        iterations.append(it)

    # one final Gram-Schmidt pass keeps the rows orthonormal to machine precision
    for c in range(k):
        W[c] -= W[:c].T @ (W[:c] @ W[c])
        W[c] /= np.linalg.norm(W[c])
    S = Z @ W.T

    # flag a component only when neither the contrast nor the excess kurtosis
    # separates it from a Gaussian at 3 standard errors
    expected = _gaussian_expectation(G)
    for c in range(k):
        vals = G(S[:, c])
        spread = vals.std() / np.sqrt(n)
        kurt = float(np.mean(S[:, c] ** 4)) - 3.0
        if (spread > 0 and abs(vals.mean() - expected) < 3 * spread
                and abs(kurt) < 3 * np.sqrt(24.0 / n)):
            warnings.warn(f"component {c} is indistinguishable from Gaussian (negentropy ~ 0); "
                          f"the separation is unreliable", RuntimeWarning, stacklevel=2)
    return ICAResult(W, S, None, iterations)


def fastica(cloud, n_components=3, contrast="logcosh", alpha=1.0, sigma=1.0, seed=None,
            tol=1e-6, max_iter=1000, strict=True):
    """Whiten ``cloud`` then run :func:`fastica_extract`; returns an :class:`Embedding`."""
    Z, transform = whiten(cloud)
    k = min(n_components, Z.shape[1])
    result = fastica_extract(Z, k, contrast, alpha, sigma, seed, tol, max_iter, strict)
    coords = result.sources
    if k < n_components:
        coords = np.hstack([coords, np.zeros((coords.shape[0], n_components - k))])
    echo = {"n_components": n_components, "contrast": contrast, "alpha": alpha,
            "sigma": sigma, "tol": tol, "max_iter": max_iter}
    return Embedding(coords, "fastica", echo,
                     info={"result": ICAResult(result.unmixing, result.sources, transform,
                                               result.n_iter)})


class FastICA(BaseEstimator, TransformerMixin):
    """Deflationary FastICA with the sklearn transformer interface.

    Attributes
    ----------
    components_ : ndarray of shape (n_components, n_features)
        Unmixing directions expressed in the original feature space.
    unmixing_ : ndarray of shape (n_components, n_whitened)
        Unit-norm directions in whitened space.
    whitening_ : Whitening
    """

    def __init__(self, n_components=None, contrast="logcosh", alpha=1.0, sigma=1.0,
                 tol=1e-6, max_iter=1000, random_state=None, strict=True):
        self.n_components = n_components
        self.contrast = contrast
        self.alpha = alpha
        self.sigma = sigma
        self.tol = tol
        self.max_iter = max_iter
        self.strict = strict
        self.random_state = random_state

    def fit(self, X, y=None):
        Z, self.whitening_ = whiten(X)
        result = fastica_extract(Z, self.n_components, self.contrast, self.alpha, self.sigma,
                                 self.random_state, self.tol, self.max_iter, self.strict)
        self.unmixing_ = result.unmixing
        self.components_ = result.unmixing @ self.whitening_.matrix
        self.mean_ = self.whitening_.mean
        self.n_iter_ = result.n_iter
        return self

    def transform(self, X):
        return self.whitening_.apply(X) @ self.unmixing_.T
