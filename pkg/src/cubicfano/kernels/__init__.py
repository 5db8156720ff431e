"""Batch-evaluation kernels: compiled extension when available, numpy otherwise.

Set ``CUBICFANO_PURE=1`` to force the pure-numpy path even when the compiled
module was built.
"""

from __future__ import annotations

import os

from . import _batch_py

if os.environ.get("CUBICFANO_PURE") == "1":
    _impl = _batch_py
    BACKEND = "numpy"
else:
    try:
        from . import _batch_c as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _batch_py
        BACKEND = "numpy"

eval_form_batch = _impl.eval_form_batch

__all__ = ["eval_form_batch", "BACKEND"]
