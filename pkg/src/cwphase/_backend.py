"""Kernel backend selection.

The compiled extension is preferred when importable; CW_PHASE_PURE_PYTHON=1
forces the numpy fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

if os.environ.get("CW_PHASE_PURE_PYTHON", "").strip() not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

cumulant_scan = _impl.cumulant_scan
log_conv_step = _impl.log_conv_step


def backend_name() -> str:
    """'compiled' when the Cython kernels are active, 'python' otherwise."""
    return _impl.BACKEND
