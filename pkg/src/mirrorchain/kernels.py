"""Backend selection for the bit-level kernels.

The compiled extension is used when importable; set ``MIRRORCHAIN_PURE=1`` to
force the numpy fallback.  ``BACKEND`` names the active implementation.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("MIRRORCHAIN_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

jw_apply = _impl.jw_apply
sector_states = _impl.sector_states
sector_hamiltonian = _impl.sector_hamiltonian


def available_backends() -> dict:
    """Map backend name to kernel module for every importable implementation."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
