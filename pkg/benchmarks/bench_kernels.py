"""Compiled vs numpy kernel timings on segment-sized inputs.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]

Also times one full segment (decomposition plus 93 features) under each
backend in a subprocess, since the backend is fixed at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from shockadvice import _backend, _kernels_py

SEGMENT = """
import time, numpy as np
from shockadvice.mvmd import tri_signal
from shockadvice.features import extract_all
x = np.random.default_rng(0).normal(size=2000)
t0 = time.perf_counter()
for _ in range({n}):
    extract_all(tri_signal(x))
print((time.perf_counter() - t0) / {n})
"""


def cases():
    rng = np.random.default_rng(0)
    x = rng.normal(size=2000)
    m = np.concatenate([x, -x[::-1]])
    f_hat = np.fft.rfft(m)
    freqs = np.arange(f_hat.size) / m.size
    omega0 = 0.5 * np.arange(10) / 10
    bits = (x > np.median(x)).astype(np.uint8)
    D = rng.uniform(size=(400, 1600))
    q, t = rng.normal(size=400), rng.normal(size=1600)
    r = 0.2 * x.std()
    return {
        "vmd_admm (200 iters)": lambda k: k.vmd_admm(f_hat, freqs, omega0, 2000.0, 0.0, 0.0, 200, True),
        "sample_entropy_counts": lambda k: k.sample_entropy_counts(x, 2, r),
        "fuzzy_entropy_phi": lambda k: k.fuzzy_entropy_phi(x, 2, r),
        "lempel_ziv": lambda k: k.lempel_ziv(bits),
        "exponential_lifts": lambda k: k.exponential_lifts(np.abs(x), 50.0),
        "accumulate_sqdist 400x1600": lambda k: k.accumulate_sqdist(D.copy(), q, t),
        "topk_indices 400x1600 k=11": lambda k: k.topk_indices(D, 11),
    }


def best_of(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.2 and number < 1000:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def segment_time(backend, n=3):
    env = dict(os.environ, SHOCKADVICE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", SEGMENT.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    compiled = _backend.load_compiled()
    if compiled is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
        return 1
    print(f"{'kernel':32s} {'cython ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, fn in cases().items():
        tc = best_of(lambda: fn(compiled), args.repeat)
        tp = best_of(lambda: fn(_kernels_py), args.repeat)
        print(f"{name:32s} {1e3 * tc:10.3f} {1e3 * tp:10.3f} {tp / tc:8.1f}x")
    tc, tp = segment_time("cython"), segment_time("python")
    print(f"{'one segment end to end':32s} {1e3 * tc:10.1f} {1e3 * tp:10.1f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
