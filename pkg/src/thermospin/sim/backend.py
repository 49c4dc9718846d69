"""Kernel backend selection.

The compiled Cython kernels are used when the extension built; otherwise the
numpy fallback is selected.  Both expose the same in-place interface
(apply_1q, apply_rz, apply_cz) and agree to machine precision, see
benchmarks/bench_kernels.py for a speed comparison.
"""

from __future__ import annotations

import os

if os.environ.get("THERMOSPIN_FORCE_NUMPY"):
    from . import kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import kernels_py as kernels

apply_1q = kernels.apply_1q
apply_rz = kernels.apply_rz
apply_cz = kernels.apply_cz
BACKEND = kernels.BACKEND
