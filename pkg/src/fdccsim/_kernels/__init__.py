"""Numeric kernels: compiled fast path with a pure-Python fallback.

The hot loops (dense LU solves and transient stepping) live in the
``_native`` Cython extension when it is built; otherwise the numpy-based
``pykernels`` module provides the same functions. Set
``FDCCSIM_BACKEND=python`` to force the fallback, or
``FDCCSIM_BACKEND=native`` to fail loudly when the extension is missing.
"""

from __future__ import annotations

import os

_requested = os.environ.get("FDCCSIM_BACKEND", "auto").strip().lower()

if _requested in ("", "auto", "native"):
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise ImportError(
                "FDCCSIM_BACKEND=native but the compiled extension is not available"
            ) from None
        from . import pykernels as _impl

        BACKEND = "python"
elif _requested == "python":
    from . import pykernels as _impl

    BACKEND = "python"
else:
    raise ValueError(f"unknown FDCCSIM_BACKEND value {_requested!r}")

SINGULAR_EPS = _impl.SINGULAR_EPS
lu_factor_z = _impl.lu_factor_z
lu_solve_z = _impl.lu_solve_z
lu_factor_d = _impl.lu_factor_d
lu_solve_d = _impl.lu_solve_d
solve_z = _impl.solve_z
solve_d = _impl.solve_d
run_transient = _impl.run_transient
