"""Select the kernel implementation at import time.

The compiled extension is used when it was built; otherwise the numpy
fallback. Set ``SHOCKADVICE_BACKEND=python`` to force the fallback.
"""

import importlib
import os

from . import _kernels_py

KERNEL_NAMES = (
    "vmd_admm",
    "sample_entropy_counts",
    "fuzzy_entropy_phi",
    "lempel_ziv",
    "exponential_lifts",
    "accumulate_sqdist",
    "topk_indices",
)


def load_compiled():
    """Return the compiled kernel module, or None if it is not importable."""
    try:
        return importlib.import_module("shockadvice._kernels")
    except ImportError:
        return None


def _select():
    if os.environ.get("SHOCKADVICE_BACKEND", "").lower() == "python":
        return _kernels_py, "python"
    mod = load_compiled()
    if mod is None:
        return _kernels_py, "python"
    return mod, "cython"


kernels, BACKEND = _select()
