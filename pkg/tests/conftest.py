import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

FS = 250
N = 2000


def random_signals(count=20, seed=42, n=N):
    """Mix of white noise, noisy sines, random walks and pulse trains at random scales."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / FS
    out = []
    for i in range(count):
        kind = i % 4
        if kind == 0:
            x = rng.normal(size=n)
        elif kind == 1:
            x = np.sin(2 * np.pi * rng.uniform(1, 12) * t + rng.uniform(0, 6)) + 0.3 * rng.normal(size=n)
        elif kind == 2:
            x = np.cumsum(rng.normal(size=n))
            x -= x.mean()
        else:
            x = np.zeros(n)
            for b in np.arange(rng.uniform(0, 200), n, rng.uniform(150, 300)):
                x += np.exp(-0.5 * ((np.arange(n) - b) / 4) ** 2)
            x += 0.05 * rng.normal(size=n)
        out.append(x * rng.uniform(0.1, 5))
    return out


def band_limited(rng, n=N, lo=None, hi=None):
    """Random-phase, random-amplitude signal with energy only inside [lo, hi] Hz."""
    lo = rng.uniform(0.5, 10) if lo is None else lo
    hi = rng.uniform(lo + 2, 40) if hi is None else hi
    f = np.fft.rfftfreq(n, 1 / FS)
    spec = np.zeros(f.size, dtype=complex)
    band = (f >= lo) & (f <= hi)
    spec[band] = rng.uniform(0.2, 1, band.sum()) * np.exp(1j * rng.uniform(0, 2 * np.pi, band.sum()))
    x = np.fft.irfft(spec, n)
    return x / np.std(x)


@pytest.fixture(scope="session")
def synth_db(tmp_path_factory):
    from shockadvice.synthetic import write_synthetic_db

    d = tmp_path_factory.mktemp("db")
    write_synthetic_db(str(d), n_records=10, seconds=96, seed=7)
    return str(d)


SMALL_CONFIG = """
seed = 5

[cv]
repetitions = 3

[vmd]
max_iters = 60

[knn]
k_grid = [1, 3, 5]
"""


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "cfg.toml"
    p.write_text(SMALL_CONFIG)
    return str(p)


def pytest_collection_modifyitems(items):
    # attach labels at collection so skipped criteria are reported too
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL/SKIP line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "skipped", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" not in props or rep.when not in ("call", "setup"):
                continue
            if rep.when == "setup" and rep.passed:
                continue
            status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP", "error": "FAIL"}[outcome]
            extra = props.get("detail", "")
            if outcome == "skipped" and isinstance(rep.longrepr, tuple):
                extra = rep.longrepr[2].replace("Skipped: ", "")
            lines.append((rep.location[:2], f"{status}  {props['criterion']}" + (f"  [{extra}]" if extra else "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(lines):
            terminalreporter.write_line(text)
