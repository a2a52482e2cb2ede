import numpy as np
import pytest

from asnrc.errors import DimensionError, MetricError
from asnrc.models.metrics import (divergence_horizon, nrmse, pixel_accuracy, recovery_rate,
                                  sign_agreement, windowed_nrmse)
from asnrc.tasks.glyphs import load_glyph


def test_nrmse_examples():
    y = np.sin(np.arange(50) / 4.0)
    assert nrmse(y, y) == 0.0
    assert nrmse(y, np.full_like(y, y.mean())) == pytest.approx(1.0)
    assert nrmse([1, -1, 1, -1], [0, 0, 0, 0]) == pytest.approx(1.0)


def test_nrmse_uses_reference_variance():
    assert nrmse([1, -1], [0, 0], reference_var=4.0) == pytest.approx(0.5)


def test_nrmse_errors():
    with pytest.raises(MetricError):
        nrmse([1.0, 1.0, 1.0], [1.0, 1.0, 0.0])
    with pytest.raises(MetricError):
        nrmse([1.0], [1.0])
    with pytest.raises(DimensionError):
        nrmse([1.0, 2.0], [1.0, 2.0, 3.0])


def test_sign_agreement():
    assert sign_agreement([1, -1, 1, -1], [2, -3, -1, -1]) == pytest.approx(0.75)


def test_recovery_rate_examples():
    glyph = load_glyph("7")
    frames = np.stack([glyph, load_glyph("I"), glyph, glyph])
    assert recovery_rate(frames, frames.copy()) == 1.0
    assert recovery_rate(frames, 1.0 - frames) == 0.0

    corrupted = frames.copy()
    flat = corrupted[1].reshape(-1)
    flat[:32] = 1.0 - flat[:32]
    corrupted[1] = flat.reshape(8, 8)
    assert recovery_rate(frames, corrupted, pixel_thresh=0.95) == pytest.approx(0.75)
    np.testing.assert_allclose(pixel_accuracy(frames, corrupted), [1.0, 0.5, 1.0, 1.0])


def test_divergence_horizon_examples():
    y = np.zeros(100)
    assert divergence_horizon(y, y, epsilon=0.1) is None

    ramp = np.where(np.arange(100) >= 37, 0.2 + 0.01 * (np.arange(100) - 37), 0.0)
    assert divergence_horizon(y, ramp, epsilon=0.1, hold=5) == 37

    spike = np.zeros(100)
    spike[20] = 1.0
    assert divergence_horizon(y, spike, epsilon=0.1, hold=5) is None
    assert divergence_horizon(y, spike, epsilon=0.1, hold=1) == 20


def test_windowed_nrmse():
    y = np.sin(np.arange(100) / 5.0)
    pred = y.copy()
    pred[50:] = 0.0
    windows = windowed_nrmse(y, pred, window=25)
    assert len(windows) == 4
    assert windows[0] == 0.0 and windows[1] == 0.0
    assert windows[2] > 0.5
    with pytest.raises(MetricError):
        windowed_nrmse(y, pred, window=1)


def test_nrmse_ignores_a_common_offset():
    rng = np.random.default_rng(3)
    y = rng.standard_normal(200)
    pred = y + 0.1 * rng.standard_normal(200)
    assert nrmse(y + 5.0, pred + 5.0) == pytest.approx(nrmse(y, pred), rel=1e-9)


def test_recovery_rate_ignores_frame_order():
    rng = np.random.default_rng(4)
    truth = (rng.random((12, 8, 8)) > 0.5).astype(float)
    recovered = truth.copy()
    recovered[rng.random(truth.shape) < 0.04] = 0.5
    order = rng.permutation(12)
    assert recovery_rate(truth[order], recovered[order]) == recovery_rate(truth, recovered)


def test_divergence_horizon_grows_with_tolerance():
    t = np.arange(300)
    y = np.sin(t / 7.0)
    pred = np.sin(t / 7.0 * 1.01) + 1e-3 * t
    horizons = []
    for eps in (0.05, 0.1, 0.2, 0.4, 0.8):
        h = divergence_horizon(y, pred, epsilon=eps, hold=5)
        horizons.append(np.inf if h is None else h)
    assert horizons == sorted(horizons)
    assert horizons[0] < horizons[-1]
