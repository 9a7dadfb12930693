"""Kernel backend selection.

The compiled Cython kernel is preferred when its extension module built;
otherwise the numpy fallback is used.  Set ``MACROLAB_PURE=1`` to force
the fallback (useful for benchmarking the two against each other, see
``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

from . import _kernels_py

_force_pure = os.environ.get("MACROLAB_PURE", "").lower() in {"1", "true", "yes"}

if _force_pure:
    _impl = _kernels_py
    KERNEL_BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        KERNEL_BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        KERNEL_BACKEND = "pure"

accumulate_embedded = _impl.accumulate_embedded

__all__ = ["KERNEL_BACKEND", "accumulate_embedded"]
