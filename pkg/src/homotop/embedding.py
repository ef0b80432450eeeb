"""Takens delay embedding and false-nearest-neighbour dimension estimation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import ValidationError, check_positive_int
from .ingest import TimeSeries

__all__ = [
    "DelayParams",
    "FNNResult",
    "TakensEmbedding",
    "takens_embed",
    "false_nearest_neighbors",
]


@dataclass(frozen=True)
class DelayParams:
    """Embedding dimension and lag (in samples)."""

    dim: int = 12
    lag: int = 1

    def __post_init__(self):
        check_positive_int(self.dim, "dim")
        check_positive_int(self.lag, "lag")

    def check_length(self, n_samples):
        if (self.dim - 1) * self.lag >= n_samples:
            raise ValidationError(
                f"series too short: length {n_samples} cannot hold dim={self.dim}, "
                f"lag={self.lag} (needs > {(self.dim - 1) * self.lag})")


def _as_samples(series):
    if isinstance(series, TimeSeries):
        return series.samples
    x = np.asarray(series, dtype=np.float64).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ValidationError("series must be non-empty and finite")
    return x


def takens_embed(series, params=DelayParams()):
    """Delay-embed a scalar series.

    Row ``k`` holds ``(x(t), x(t - lag), ..., x(t - (dim-1) lag))`` with
    ``t = k + (dim-1) lag``, so the cloud has ``len - (dim-1) lag`` rows.
    """
    x = _as_samples(series)
    params.check_length(x.size)
    offset = (params.dim - 1) * params.lag
    n = x.size - offset
    cols = [x[offset - j * params.lag: offset - j * params.lag + n] for j in range(params.dim)]
    return np.column_stack(cols)


@dataclass(frozen=True)
class FNNResult:
    dimension: int
    fractions: np.ndarray  # fractions[k] is the false-neighbour rate going from dim k+1 to k+2
    plateau: bool


def _nearest_neighbors(points, chunk=1024):
    """Exact nearest neighbour (index, distance) for every row, excluding itself."""
    n = points.shape[0]
    idx = np.empty(n, dtype=np.intp)
    dist = np.empty(n)
    for start in range(0, n, chunk):
        block = cdist(points[start:start + chunk], points)
        rows = np.arange(block.shape[0])
        block[rows, start + rows] = np.inf
        j = np.argmin(block, axis=1)  # first minimum wins on ties
        idx[start:start + chunk] = j
        dist[start:start + chunk] = block[rows, j]
    return idx, dist


def false_nearest_neighbors(series, max_dim=10, lag=1, ratio_tol=10.0, abs_tol=None,
                            threshold=0.01):
    """Estimate an embedding dimension with the false-nearest-neighbour test.

    A neighbour found in dimension ``d`` is false when adding coordinate
    ``d+1`` stretches the pair by more than ``ratio_tol`` times their
    distance, or pushes their distance above ``abs_tol`` (default: twice the
    signal's standard deviation).

    Returns
    -------
    FNNResult
        ``dimension`` is the smallest ``d`` whose false-neighbour fraction is
        below ``threshold``; if none is, ``max_dim`` is reported with a warning.
    """
    x = _as_samples(series)
    max_dim = check_positive_int(max_dim, "max_dim")
    lag = check_positive_int(lag, "lag")
    if max_dim * lag >= x.size:
        raise ValidationError(
            f"series too short: length {x.size} for max_dim={max_dim}, lag={lag}")
    std = float(np.std(x))
    if std == 0.0:
        raise ValidationError("degenerate series: constant signal, all neighbour distances are zero")
    if abs_tol is None:
        abs_tol = 2.0 * std

    # evaluate every dimension on the points that still exist at max_dim + 1
    full = takens_embed(x, DelayParams(max_dim + 1, lag))
    fractions = np.empty(max_dim)
    for d in range(1, max_dim + 1):
        base = full[:, :d]
        nn, r_d = _nearest_neighbors(base)
        usable = r_d > 0
        if not np.any(usable):
            raise ValidationError("degenerate series: all nearest-neighbour distances are zero")
        extra = np.abs(full[:, d] - full[nn, d])
        r_next = np.sqrt(r_d ** 2 + extra ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            false_ratio = extra / r_d > ratio_tol
        false_abs = r_next > abs_tol
        flags = (false_ratio | false_abs)[usable]
        fractions[d - 1] = flags.mean()

    below = np.nonzero(fractions < threshold)[0]
    if below.size:
        return FNNResult(int(below[0]) + 1, fractions, True)
    warnings.warn(f"false-neighbour fraction never fell below {threshold}: no plateau up to "
                  f"max_dim={max_dim}", RuntimeWarning, stacklevel=2)
    return FNNResult(max_dim, fractions, False)


class TakensEmbedding(BaseEstimator, TransformerMixin):
    """Delay embedding as a transformer.

    ``transform`` takes a 1-D series (or a single-column array) and returns
    the delay cloud. Setting ``dim="fnn"`` picks the dimension at ``fit``
    with :func:`false_nearest_neighbors`.
    """

    def __init__(self, dim=12, lag=1, max_dim=15):
        self.dim = dim
        self.lag = lag
        self.max_dim = max_dim

    def fit(self, X, y=None):
        x = _as_samples(X)
        if self.dim == "fnn":
            self.fnn_ = false_nearest_neighbors(x, max_dim=self.max_dim, lag=self.lag)
            self.dim_ = self.fnn_.dimension
        else:
            self.dim_ = check_positive_int(self.dim, "dim")
        DelayParams(self.dim_, self.lag).check_length(x.size)
        return self

    def transform(self, X):
        return takens_embed(X, DelayParams(self.dim_, self.lag))
