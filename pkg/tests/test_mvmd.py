import numpy as np
import pytest

from conftest import band_limited
from shockadvice.ingest import NSH, SH
from shockadvice.mvmd import (ModeDecomposition, TriSignal, VmdConfig, read_trisignals, synthesize_tri,
                              tri_signal, vmd_decompose, write_trisignals)
from shockadvice.synthetic import episode

FS = 250
t = np.arange(2000) / FS


def _band_energy(x, lo, hi):
    """Energy of ``x`` inside [lo, hi] Hz via brick-wall FFT filtering."""
    X = np.fft.rfft(x)
    f = np.fft.rfftfreq(x.size, 1 / FS)
    X[(f < lo) | (f > hi)] = 0
    y = np.fft.irfft(X, x.size)
    return float(np.dot(y, y))


def test_zero_input():
    d = vmd_decompose(np.zeros(2000))
    assert np.all(d.modes == 0) and np.all(d.residual == 0)
    assert d.modes.shape == (10, 2000)


@pytest.mark.parametrize("phase", [0.0, 0.7, 1.9, 3.0])
def test_sine_5hz(phase):
    x = np.sin(2 * np.pi * 5 * t + phase)
    d = vmd_decompose(x, VmdConfig(K=3))
    e = (d.modes ** 2).sum(axis=1)
    k = int(np.argmax(e))
    assert abs(d.center_freqs[k] - 5.0) <= 0.25
    assert _band_energy(d.modes[k], 4, 6) >= 0.95 * _band_energy(x, 4, 6)


@pytest.mark.parametrize("K", [4, 5])
def test_two_tone(K):
    x = np.sin(2 * np.pi * 2 * t) + np.sin(2 * np.pi * 25 * t)
    d = vmd_decompose(x, VmdConfig(K=K))
    for f0 in (2.0, 25.0):
        per_mode = [_band_energy(m, f0 - 1, f0 + 1) for m in d.modes]
        k = int(np.argmax(per_mode))
        assert abs(d.center_freqs[k] - f0) <= 0.5


def test_invariants_on_band_limited():
    rng = np.random.default_rng(11)
    cfg = VmdConfig()
    for _ in range(8):
        x = band_limited(rng)
        d = vmd_decompose(x, cfg)
        assert d.center_freqs[0] == 0
        assert np.all(np.diff(d.center_freqs[1:]) >= 0)
        assert np.all((d.center_freqs >= 0) & (d.center_freqs < FS / 2))
        assert np.linalg.norm(d.residual) <= 0.05 * np.linalg.norm(x)
        assert (d.modes ** 2).sum() <= 1.1 * np.dot(x, x)
        if d.iterations_used < cfg.max_iters:
            assert d.delta < cfg.tol
        # center frequency is the power-weighted mean of the returned spectrum
        T = 2 * (d.spectra.shape[1] - 1)
        f = np.arange(d.spectra.shape[1]) / T * FS
        p = np.abs(d.spectra) ** 2
        for k in range(1, cfg.K):
            if p[k].sum() > 0:
                assert abs(np.sum(f * p[k]) / p[k].sum() - d.center_freqs[k]) < 1e-6


def test_modes_real():
    x = band_limited(np.random.default_rng(3))
    d = vmd_decompose(x)
    T = 2 * (d.spectra.shape[1] - 1)
    full = np.fft.ifft(np.concatenate([d.spectra, np.conj(d.spectra[:, -2:0:-1])], axis=1), n=T, axis=1)
    assert np.max(np.abs(full.imag)) < 1e-9 * np.linalg.norm(x)


def test_deterministic():
    x = band_limited(np.random.default_rng(4))
    a, b = vmd_decompose(x), vmd_decompose(x)
    assert np.array_equal(a.modes, b.modes) and np.array_equal(a.center_freqs, b.center_freqs)


def test_nonconvergence_flag():
    x = band_limited(np.random.default_rng(5))
    d = vmd_decompose(x, VmdConfig(max_iters=3))
    assert d.iterations_used == 3


def test_input_checks():
    with pytest.raises(ValueError):
        vmd_decompose(np.ones(10))
    with pytest.raises(ValueError):
        vmd_decompose(np.r_[np.ones(100), np.nan])
    with pytest.raises(ValueError):
        VmdConfig(K=1)
    with pytest.raises(ValueError):
        VmdConfig(freq_bound=130)


def _fake(centers):
    modes = np.array([np.full(2000, float(i + 1)) for i in range(len(centers))])
    return ModeDecomposition(modes, np.array(centers, dtype=float), np.zeros(2000), 1)


def test_grouping_four_low_modes():
    d = _fake([0, 3, 5, 7, 9, 12, 15, 20, 30, 40])
    tri = synthesize_tri(np.zeros(2000), d)
    assert np.all(tri.nsh == 2 + 3 + 4 + 5)
    assert np.all(tri.sh == 6 + 7 + 8 + 9 + 10)


def test_grouping_all_high():
    tri = synthesize_tri(np.zeros(2000), _fake([0, 11, 14, 30]))
    assert np.all(tri.nsh == 0)


def test_tri_reconstruction():
    rng = np.random.default_rng(6)
    for _ in range(4):
        x = band_limited(rng)
        d = vmd_decompose(x)
        tri = synthesize_tri(x, d)
        rebuilt = tri.sh + tri.nsh + d.modes[0] + d.residual
        np.testing.assert_allclose(rebuilt, x, atol=1e-9)
        assert np.linalg.norm(tri.sh + tri.nsh + d.modes[0] - x) <= 0.05 * np.linalg.norm(x)


def test_normal_rhythm_nsh_dominates():
    rng = np.random.default_rng(8)
    from shockadvice.preprocess import filter_chain

    x = filter_chain(episode("N", 8, FS, rng))
    tri = tri_signal(x)
    assert np.std(tri.nsh) > np.std(tri.sh)


def test_trisignal_io(tmp_path):
    rng = np.random.default_rng(9)
    items = [("cu01", 0, SH, TriSignal(*rng.normal(size=(3, 2000)))),
             ("418", 2000, NSH, TriSignal(*rng.normal(size=(3, 2000))))]
    p = str(tmp_path / "t.bin")
    write_trisignals(p, items)
    back = read_trisignals(p)
    for a, b in zip(items, back):
        assert a[:3] == b[:3]
        assert np.array_equal(a[3].as_array(), b[3].as_array())
    with open(p, "rb") as fh:
        raw = fh.read()
    # magic + count + 2 x (u16 length + id + i64 + u8 + 6000 doubles)
    assert len(raw) == 12 + (2 + 4 + 9 + 48000) + (2 + 3 + 9 + 48000)
