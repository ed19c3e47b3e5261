"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``RAREFALL_PURE_PYTHON=1`` forces the NumPy fallback.
"""

import importlib
import os

_NAMES = {"cython": "rarefall._kernels", "python": "rarefall._fallback"}


def load(name):
    """Import a specific backend by name ('cython' or 'python')."""
    return importlib.import_module(_NAMES[name])


def _select():
    if os.environ.get("RAREFALL_PURE_PYTHON", "") not in ("", "0"):
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        return "python", load("python")


BACKEND, kernels = _select()
