import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shockadvice.ingest import EcgSegment
from shockadvice.preprocess import (FilterChainConfig, filter_chain, lowpass_butter2, moving_average,
                                    preprocess_segment, remove_baseline)

FS = 250
t = np.arange(2000) / FS


def _amp(x, f0):
    """Amplitude of the f0 component from the DFT bin (2000 samples -> 0.125 Hz bins)."""
    k = int(round(f0 * x.size / FS))
    return 2 * np.abs(np.fft.rfft(x)[k]) / x.size


def _ma_oracle(x, order):
    h = order // 2
    return np.array([np.mean(x[max(0, i - h):i + h + 1]) for i in range(len(x))])


def test_ma_constant():
    np.testing.assert_allclose(moving_average(np.full(50, 3.5), 5), 3.5, rtol=1e-15)


def test_ma_impulse():
    out = moving_average(np.array([0, 0, 5, 0, 0.0]), 5)
    np.testing.assert_allclose(out, [5 / 3, 1.25, 1, 1.25, 5 / 3])


@given(arrays(np.float64, st.integers(5, 60), elements=st.floats(-1e3, 1e3)), st.sampled_from([1, 3, 5]))
@settings(max_examples=80, deadline=None)
def test_ma_oracle(x, order):
    np.testing.assert_allclose(moving_average(x, order), _ma_oracle(x, order), rtol=1e-9, atol=1e-9)


def test_ma_variance():
    x = np.random.default_rng(0).normal(size=2000)
    assert moving_average(x, 5).var() < x.var()


def test_ma_errors():
    with pytest.raises(ValueError):
        moving_average(np.array([]), 5)
    with pytest.raises(ValueError):
        moving_average(np.ones(10), 4)
    with pytest.raises(ValueError):
        moving_average(np.ones(3), 5)


def test_highpass_dc_and_zero():
    c = 2.7
    assert np.max(np.abs(remove_baseline(np.full(2000, c)))) <= 1e-6 * c
    assert np.all(remove_baseline(np.zeros(2000)) == 0)


def test_highpass_drift():
    drift = np.sin(2 * np.pi * 0.25 * t)
    tone = np.sin(2 * np.pi * 5 * t)
    out = remove_baseline(drift + tone)
    assert _amp(out, 5) == pytest.approx(1.0, rel=0.05)
    assert _amp(out, 0.25) < 0.2 * _amp(drift, 0.25)


def test_lowpass():
    assert _amp(lowpass_butter2(np.sin(2 * np.pi * 5 * t)), 5) == pytest.approx(1.0, rel=0.02)
    assert _amp(lowpass_butter2(np.sin(2 * np.pi * 60 * t)), 60) <= 0.1
    assert np.all(lowpass_butter2(np.zeros(2000)) == 0)


def test_lowpass_magnitude_oracle():
    # forward-backward => |H|^2 of the bilinear Butterworth
    from scipy.signal import butter, freqz

    b, a = butter(2, 30, fs=FS)
    for f0 in (10.0, 40.0, 60.0):
        _, h = freqz(b, a, worN=[f0], fs=FS)
        out = lowpass_butter2(np.sin(2 * np.pi * f0 * t))
        assert _amp(out[200:-200], f0) == pytest.approx(abs(h[0]) ** 2, rel=0.03, abs=2e-3)


@pytest.mark.parametrize("f", [moving_average, remove_baseline, lowpass_butter2, filter_chain])
def test_linearity(f):
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=2000), rng.normal(size=2000)
    lhs = f(2.5 * x - 0.7 * y)
    rhs = 2.5 * f(x) - 0.7 * f(y)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.max(np.abs(rhs)))


def test_zero_phase():
    x = np.sin(2 * np.pi * 6 * t)
    y = filter_chain(x)
    lags = np.arange(-20, 21)
    cc = [np.dot(x[100:-100], np.roll(y, lag)[100:-100]) for lag in lags]
    assert lags[int(np.argmax(cc))] == 0


def _chain_gain(f0):
    x = np.sin(2 * np.pi * f0 * t)
    return np.linalg.norm(filter_chain(x)[200:-200]) / np.linalg.norm(x[200:-200])


def test_chain_peak_gain():
    # The chain never passes any frequency with gain above 0.95, so a second
    # pass always removes at least ~5% more of the signal.
    gains = [_chain_gain(f0) for f0 in np.arange(1, 30, 0.125)]
    assert max(gains) < 0.951


@pytest.mark.xfail(strict=True, reason="peak chain gain is 0.95 (5-tap average x 1 Hz high-pass), "
                                         "so re-filtering changes in-band signals by more than 5%")
def test_chain_idempotent_in_band():
    rng = np.random.default_rng(2)
    spec = np.zeros(1001, dtype=complex)
    spec[32:65] = np.exp(1j * rng.uniform(0, 6.3, 33))   # 4-8 Hz
    x = np.fft.irfft(spec, 2000)
    y = filter_chain(x)
    z = filter_chain(y)
    assert np.linalg.norm(z - y) <= 0.05 * np.linalg.norm(y)


def test_preprocess_segment():
    seg = EcgSegment("r", 0, np.ones(2000), "NSH")
    out = preprocess_segment(seg)
    assert abs(out.samples.mean()) < 1e-6
    assert (out.record_id, out.start_index, out.label) == ("r", 0, "NSH")
    z = preprocess_segment(EcgSegment("r", 0, np.zeros(2000), "SH"))
    assert np.all(z.samples == 0)
    x = EcgSegment("r", 0, np.random.default_rng(0).normal(size=2000), "SH")
    assert np.array_equal(preprocess_segment(x).samples, preprocess_segment(x).samples)


def test_config_validation():
    with pytest.raises(ValueError):
        FilterChainConfig(ma_order=4)
    with pytest.raises(ValueError):
        FilterChainConfig(hp_cutoff=40, lp_cutoff=30)
    with pytest.raises(ValueError):
        FilterChainConfig(lp_cutoff=130)
    with pytest.raises(ValueError):
        FilterChainConfig(lp_order=4)


def test_short_input():
    with pytest.raises(ValueError):
        remove_baseline(np.ones(5))
