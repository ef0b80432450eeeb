import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from homotop import ValidationError
from homotop.embedding import DelayParams, TakensEmbedding, false_nearest_neighbors, takens_embed
from homotop.ingest import TimeSeries


def test_takens_small_example():
    np.testing.assert_array_equal(takens_embed([1, 2, 3, 4], DelayParams(2, 1)),
                                  [[2, 1], [3, 2], [4, 3]])


def test_takens_dim_one_is_identity(rng):
    x = rng.standard_normal(17)
    np.testing.assert_array_equal(takens_embed(x, DelayParams(1, 3))[:, 0], x)


def test_takens_too_short():
    with pytest.raises(ValidationError, match="series too short"):
        takens_embed(np.arange(10.0), DelayParams(12, 1))


def test_takens_three_coordinate_convention(rng):
    x = rng.standard_normal(30)
    lag = 2
    P = takens_embed(TimeSeries(x), DelayParams(3, lag))
    for k, row in enumerate(P):
        t = k + 2 * lag
        np.testing.assert_array_equal(row, [x[t], x[t - lag], x[t - 2 * lag]])


@given(n=st.integers(5, 60), dim=st.integers(1, 4), lag=st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_takens_shift_property(n, dim, lag):
    x = np.arange(n, dtype=float) ** 1.5
    if (dim - 1) * lag >= n:
        return
    P = takens_embed(x, DelayParams(dim, lag))
    assert P.shape == (n - (dim - 1) * lag, dim)
    if lag == 1 and P.shape[0] > 1:
        np.testing.assert_array_equal(P[1:, 1:], P[:-1, :-1])


def test_fnn_sine_low_dimension():
    t = np.arange(2000) * 0.05
    res = false_nearest_neighbors(np.sin(t), max_dim=6, lag=8)
    assert res.dimension <= 2
    assert np.all((res.fractions >= 0) & (res.fractions <= 1))
    assert np.all(np.diff(res.fractions) <= 1e-12)


def test_fnn_white_noise_no_plateau():
    x = np.random.default_rng(3).standard_normal(600)
    with pytest.warns(RuntimeWarning, match="no plateau"):
        res = false_nearest_neighbors(x, max_dim=10, lag=1)
    assert res.dimension == 10
    assert not res.plateau
    assert np.all(res.fractions > 0.01)


def test_fnn_constant_series():
    with pytest.raises(ValidationError, match="degenerate series"):
        false_nearest_neighbors(np.ones(100), max_dim=3)


def test_takens_estimator():
    x = np.sin(np.arange(300) * 0.1)
    est = TakensEmbedding(dim=3, lag=2)
    out = est.fit_transform(x)
    np.testing.assert_array_equal(out, takens_embed(x, DelayParams(3, 2)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fnn = TakensEmbedding(dim="fnn", lag=8).fit(x)
    assert 1 <= fnn.dim_ <= 15
    assert est.get_params()["lag"] == 2
