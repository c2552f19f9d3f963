"""The compiled kernels and their numpy twins must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import band_limited, random_signals
from shockadvice import _backend, _kernels_py as py

cy = _backend.load_compiled()
pytestmark = pytest.mark.skipif(cy is None, reason="compiled extension not built")


def test_same_kernel_set():
    for name in _backend.KERNEL_NAMES:
        assert callable(getattr(py, name)) and callable(getattr(cy, name))


def test_env_override(monkeypatch):
    monkeypatch.setenv("SHOCKADVICE_BACKEND", "python")
    mod, name = _backend._select()
    assert mod is py and name == "python"


def _vmd_input(seed):
    x = band_limited(np.random.default_rng(seed))
    x = np.concatenate([x, -x[::-1]])
    f_hat = np.fft.rfft(x)
    freqs = np.arange(f_hat.size) / x.size
    return f_hat, freqs, 0.5 * np.arange(6) / 6


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("tau", [0.0, 0.1])
def test_vmd_admm(seed, tau):
    f_hat, freqs, w0 = _vmd_input(seed)
    a = py.vmd_admm(f_hat, freqs, w0, 2000.0, tau, 0.0, 40, True)
    b = cy.vmd_admm(f_hat, freqs, w0, 2000.0, tau, 0.0, 40, True)
    assert a[2] == b[2] == 40
    np.testing.assert_allclose(b[0], a[0], rtol=0, atol=1e-9 * np.abs(a[0]).max())
    np.testing.assert_allclose(b[1], a[1], rtol=1e-9)


def test_vmd_admm_converged():
    t = np.arange(4000) / 250
    f_hat = np.fft.rfft(np.sin(2 * np.pi * 3 * t) + 0.5 * np.sin(2 * np.pi * 20 * t))
    freqs = np.arange(f_hat.size) / 4000
    w0 = np.array([0.0, 0.1, 0.3])
    a = py.vmd_admm(f_hat, freqs, w0, 2000.0, 0.0, 1e-7, 500, True)
    b = cy.vmd_admm(f_hat, freqs, w0, 2000.0, 0.0, 1e-7, 500, True)
    assert abs(a[2] - b[2]) <= 1 and a[3] < 1e-7 and b[3] < 1e-7
    np.testing.assert_allclose(b[1], a[1], rtol=1e-7)


@pytest.mark.parametrize("quantized", [False, True])
def test_sample_entropy_counts(quantized):
    for x in random_signals(6, seed=1, n=600):
        if quantized:
            x = np.round(x * 4) / 4   # many distances exactly at r
        r = 0.25 if quantized else 0.2 * x.std()
        assert py.sample_entropy_counts(x, 2, r) == cy.sample_entropy_counts(x, 2, r)


def test_fuzzy_entropy_phi():
    for x in random_signals(6, seed=2, n=600):
        r = 0.2 * x.std()
        a, b = py.fuzzy_entropy_phi(x, 2, r), cy.fuzzy_entropy_phi(x, 2, r)
        np.testing.assert_allclose(b, a, rtol=1e-12)


@given(st.lists(st.integers(0, 1), max_size=300))
@settings(max_examples=200, deadline=None)
def test_lempel_ziv(bits):
    b = np.array(bits, dtype=np.uint8)
    assert py.lempel_ziv(b) == cy.lempel_ziv(b)


def test_exponential_lifts():
    for x in random_signals(8, seed=3):
        for tau in (10.0, 50.0):
            assert py.exponential_lifts(np.abs(x), tau) == cy.exponential_lifts(np.abs(x), tau)


def test_accumulate_sqdist_bitwise():
    rng = np.random.default_rng(4)
    D1 = rng.uniform(size=(30, 40))
    D2 = D1.copy()
    q, t = rng.normal(size=30), rng.normal(size=40) * 1e3
    py.accumulate_sqdist(D1, q, t)
    cy.accumulate_sqdist(D2, q, t)
    assert np.array_equal(D1, D2)


@pytest.mark.parametrize("kmax", [1, 5, 40])
def test_topk_with_ties(kmax):
    D = np.random.default_rng(5).integers(0, 4, size=(25, 40)).astype(float)
    assert np.array_equal(py.topk_indices(D, kmax), cy.topk_indices(D, kmax))
