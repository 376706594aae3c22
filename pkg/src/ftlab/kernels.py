"""Kernel backend selection.

The compiled extension is used when it was built; setting the environment
variable FTLAB_PURE_PYTHON=1 forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("FTLAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

earliest_collision = _impl.earliest_collision
glimm_q = _impl.glimm_q
pc_l1 = _impl.pc_l1
gagliardo = _impl.gagliardo

__all__ = ["BACKEND", "earliest_collision", "glimm_q", "pc_l1", "gagliardo"]
