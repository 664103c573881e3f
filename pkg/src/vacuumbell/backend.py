"""Selects the double-sum implementation at import time.

The compiled extension is preferred when present; setting
``VACUUMBELL_PURE=1`` in the environment forces the numpy fallback
(useful for benchmarking and for debugging kernel/fallback parity).
Results agree to rounding (different summation order), and the kernels
feed only the oracle path, so the deterministic CSV output is identical
under either backend.
"""

from __future__ import annotations

import os

if os.environ.get("VACUUMBELL_PURE") == "1":
    from . import _fallback as _impl

    HAVE_EXTENSION = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        HAVE_EXTENSION = True
    except ImportError:
        from . import _fallback as _impl

        HAVE_EXTENSION = False

pair_double_sum = _impl.pair_double_sum
BACKEND_NAME = "cython" if HAVE_EXTENSION else "numpy"

__all__ = ["pair_double_sum", "HAVE_EXTENSION", "BACKEND_NAME"]
