"""Exact t-SNE with perplexity-calibrated bandwidths and momentum gradient descent.

By default the input affinities follow the all-pairs form
``p_kl = exp(-delta_kl) / sum_{k != l} exp(-delta_kl)`` with
``delta_kl = |v_k - v_l|^2 / (2 sigma_k)`` and ``sigma_k`` set per point by
a perplexity search. ``symmetrize=True`` switches to the usual
``(p_{l|k} + p_{k|l}) / 2N``.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.special import logsumexp
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import ComputeError, ValidationError, check_point_cloud, check_random_state_seed
from ._base import Embedding

__all__ = [
    "PerplexityError",
    "conditional_precisions",
    "input_affinities",
    "output_affinities",
    "kl_divergence",
    "kl_gradient",
    "tsne",
    "TSNE",
]


class PerplexityError(ComputeError):
    def __init__(self, index, perplexity):
        self.index = index
        super().__init__(f"perplexity {perplexity} infeasible at point {index}: "
                         f"bandwidth search failed to bracket")


def _row_entropy(d2_row, beta):
    """Entropy (nats) of the distribution proportional to exp(-beta * d2_row)."""
    with np.errstate(invalid="ignore"):  # inf * 0 on a degenerate row; caught by the caller
        logits = -beta * d2_row
    log_z = logsumexp(logits)
    p = np.exp(logits - log_z)
    return log_z - float(np.sum(p * logits))


def conditional_precisions(D2, perplexity, tol=1e-5, max_steps=200):
    """Per-point ``beta_k = 1 / (2 sigma_k)`` so that each row has the target perplexity.

    ``D2`` holds squared distances. The search doubles/halves ``beta`` until
    the target entropy ``log(perplexity)`` is bracketed, then bisects.
    """
    n = D2.shape[0]
    target = np.log(perplexity)
    betas = np.empty(n)
    for k in range(n):
        row = np.delete(D2[k], k)
        row = row - row.min()  # shift-invariant; keeps exp() in range
        lo, hi = 0.0, np.inf
        beta = 1.0 / max(np.mean(row), 1e-300)
        for _ in range(max_steps):
            h = _row_entropy(row, beta)
            if abs(h - target) <= tol:
                break
            if h > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = 0.5 * (lo + hi)
        else:
            raise PerplexityError(k, perplexity)
        if not np.isfinite(beta) or beta <= 0:
            raise PerplexityError(k, perplexity)
        betas[k] = beta
    return betas


def input_affinities(X, perplexity=30.0, symmetrize=False):
    """Joint input probabilities ``P`` (zero diagonal, summing to one)."""
    n = X.shape[0]
    if not perplexity < n:
        raise ValidationError(f"perplexity must be < number of points ({n})")
    D2 = squareform(pdist(X, "sqeuclidean"))
    betas = conditional_precisions(D2, perplexity)
    logits = -betas[:, None] * D2
    np.fill_diagonal(logits, -np.inf)
    if symmetrize:
        cond = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
        P = (cond + cond.T) / (2.0 * n)
    else:
        P = np.exp(logits - logsumexp(logits))
    np.fill_diagonal(P, 0.0)
    return P / P.sum()


def output_affinities(Y):
    """Student-t affinities; returns ``(Q, W)`` with ``W = (1 + d_kl)^{-1}``."""
    W = 1.0 / (1.0 + squareform(pdist(Y, "sqeuclidean")))
    np.fill_diagonal(W, 0.0)
    return W / W.sum(), W


def kl_divergence(P, Y):
    Q, _ = output_affinities(Y)
    mask = P > 0
    return float(np.sum(P[mask] * (np.log(P[mask]) - np.log(Q[mask]))))


def kl_gradient(P, Y):
    """Gradient of KL(P || Q) with respect to the map points.

    ``dL/du_k = 2 sum_l (p_kl + p_lk - 2 q_kl) (u_k - u_l) / (1 + d_kl)``,
    which is ``4 sum_l (p_kl - q_kl)(u_k - u_l)/(1 + d_kl)`` when ``P`` is symmetric.
    """
    Q, W = output_affinities(Y)
    M = (P + P.T - 2.0 * Q) * W
    return 2.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)


def tsne(cloud, n_components=2, perplexity=30.0, learning_rate=200.0, n_iter=1000,
         momentum=(0.5, 0.8), momentum_switch=250, symmetrize=False, seed=None):
    """Embed ``cloud`` with exact t-SNE.

    Starts from ``N(0, 1e-4 I)`` and iterates
    ``w_t = w_{t-1} - eta grad + alpha(t) (w_{t-1} - w_{t-2})`` with
    ``alpha(t) = momentum[0]`` before ``momentum_switch`` and ``momentum[1]``
    after. The KL divergence before and after optimisation is kept in
    ``info["kl_history"]`` (first and every 50th iteration, plus the last).
    """
    X = check_point_cloud(cloud, min_points=4)
    if n_iter < 1:
        raise ValidationError("n_iter must be >= 1")
    rng = check_random_state_seed(seed)
    P = input_affinities(X, perplexity, symmetrize)

    Y = 1e-2 * rng.standard_normal((X.shape[0], n_components))
    update = np.zeros_like(Y)
    history = [(0, kl_divergence(P, Y))]
    for t in range(1, n_iter + 1):
        alpha = momentum[0] if t < momentum_switch else momentum[1]
        update = alpha * update - learning_rate * kl_gradient(P, Y)
        Y = Y + update
        if t % 50 == 0 or t == n_iter:
            history.append((t, kl_divergence(P, Y)))
    Y = Y - Y.mean(axis=0)
    echo = {"n_components": n_components, "perplexity": perplexity,
            "learning_rate": learning_rate, "n_iter": n_iter, "momentum": list(momentum),
            "momentum_switch": momentum_switch, "symmetrize": symmetrize}
    return Embedding(Y, "tsne", echo, info={"kl_history": history, "P": P})


class TSNE(BaseEstimator, TransformerMixin):
    def __init__(self, n_components=2, perplexity=30.0, learning_rate=200.0, n_iter=1000,
                 momentum_switch=250, symmetrize=False, random_state=None):
        self.n_components = n_components
        self.perplexity = perplexity
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.momentum_switch = momentum_switch
        self.symmetrize = symmetrize
        self.random_state = random_state

    def fit(self, X, y=None):
        emb = tsne(X, self.n_components, self.perplexity, self.learning_rate, self.n_iter,
                   momentum_switch=self.momentum_switch, symmetrize=self.symmetrize,
                   seed=self.random_state)
        self.embedding_ = emb.coords
        self.kl_divergence_ = emb.info["kl_history"][-1][1]
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
