"""Kernel selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels take over. Set ``SECNC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("SECNC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

rank_mod = _impl.rank_mod
audit_scan = _impl.audit_scan
rank_batch = _impl.rank_batch

__all__ = ["BACKEND", "rank_mod", "rank_batch", "audit_scan"]
