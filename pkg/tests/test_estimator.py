import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from spikesr import SpikeRecovery


def test_get_set_params_roundtrip():
    est = SpikeRecovery(spectrum="triangular", grid_size=32, cutoff=4, final_iter=100)
    params = est.get_params()
    assert params["spectrum"] == "triangular"
    twin = clone(est)
    assert twin.get_params() == params


def test_fit_builds_operator():
    est = SpikeRecovery(grid_size=64, cutoff=8).fit()
    assert est.operator_.grid.size == 64
    assert est.n_features_in_ == 64


def test_unfitted_transform_rejected():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SpikeRecovery().transform(np.zeros(64))


def test_bad_spectrum_rejected():
    with pytest.raises(ValueError, match="spectrum"):
        SpikeRecovery(spectrum="boxcar").fit()


def test_single_vector_roundtrip():
    est = SpikeRecovery(grid_size=64, cutoff=8, final_iter=800).fit()
    x = np.zeros(64)
    x[17] = 2.0
    s = est.observe(x)
    x_hat = est.transform(s)
    assert x_hat.shape == (64,)
    assert np.abs(x_hat - x).sum() <= 1e-3 * np.abs(x).sum()


def test_batch_rows_recovered_independently():
    est = SpikeRecovery(grid_size=64, cutoff=8, final_iter=800).fit()
    X = np.zeros((3, 64))
    X[0, 5] = 1.0
    X[1, 30] = 2.0
    X[2, 50] = 0.5
    S = est.observe(X)
    Xh = est.transform(S)
    assert Xh.shape == (3, 64)
    assert np.abs(Xh - X).sum(axis=1).max() <= 1e-3
    assert len(est.results_) == 3


def test_2d_images_flattened_row_major():
    est = SpikeRecovery(grid_size=16, cutoff=2, dimension=2, final_iter=500).fit()
    img = np.zeros((16, 16))
    img[3, 7] = 4.0
    s = est.observe(img.ravel())
    back = est.transform(s).reshape(16, 16)
    assert np.abs(back - img).sum() <= 1e-3 * img.sum()


def test_wrong_width_rejected():
    est = SpikeRecovery(grid_size=64, cutoff=8).fit()
    with pytest.raises(ValueError, match="entries"):
        est.transform(np.zeros((2, 32)))


def test_composes_in_pipeline():
    pipe = Pipeline([("recover", SpikeRecovery(grid_size=32, cutoff=4, final_iter=300))])
    pipe.fit(None)
    x = np.zeros(32)
    x[9] = 1.0
    s = pipe.named_steps["recover"].observe(x)
    out = pipe.transform(s[None, :])
    assert np.abs(out[0] - x).sum() <= 1e-2
