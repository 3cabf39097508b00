"""Pick the compiled kernels when available, else the numpy fallback.

Set ``STOCHVOLTERRA_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("STOCHVOLTERRA_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        BACKEND = "cython"

cq_diag = kernels.cq_diag
cq_fem = kernels.cq_fem
tridiag_solve = kernels.tridiag_solve
philox_bits = kernels.philox_bits
philox_block = kernels.philox_block
philox_normals = kernels.philox_normals

__all__ = [
    "BACKEND",
    "cq_diag",
    "cq_fem",
    "philox_bits",
    "philox_block",
    "philox_normals",
    "tridiag_solve",
]
