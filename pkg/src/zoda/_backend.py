"""Kernel backend selection.

The compiled ``_kernels`` module is used when importable; set
``ZODA_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("ZODA_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.NAME


def available_backends():
    """Return every importable kernel module, fallback first."""
    mods = [_kernels_py]
    try:
        from . import _kernels

        mods.append(_kernels)
    except ImportError:
        pass
    return mods
