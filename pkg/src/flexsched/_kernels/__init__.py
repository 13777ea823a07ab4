"""Pivot-kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementation.
Set FLEXSCHED_PURE=1 to force the fallback (used by the benchmark and to
debug suspected kernel issues). Both backends are bitwise-equivalent.
"""

import os

if os.environ.get("FLEXSCHED_PURE", "") not in ("", "0"):
    from flexsched._kernels._pykernels import BACKEND, eliminate
else:
    try:
        from flexsched._kernels._speedups import BACKEND, eliminate
    except ImportError:
        from flexsched._kernels._pykernels import BACKEND, eliminate

HAVE_COMPILED = BACKEND == "compiled"

__all__ = ["eliminate", "BACKEND", "HAVE_COMPILED"]
