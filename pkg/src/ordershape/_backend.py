"""Kernel backend selection.

The weighted PAVA solve sits inside every EM iteration, so a compiled kernel
is used when the extension built; otherwise the pure-Python kernel takes over
with identical semantics. Set ``ORDERSHAPE_PURE_PYTHON=1`` to force the
fallback (used by the benchmark and to test backend parity).
"""

import os

import numpy as np

from . import _pava_py

if os.environ.get("ORDERSHAPE_PURE_PYTHON"):
    _impl = _pava_py
    BACKEND = "python"
else:
    try:
        from . import _pava as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pava_py
        BACKEND = "python"


def pava_fit(values, weights, increasing=True):
    """Weighted isotonic least-squares fit; returns only the fitted array.

    No input validation: callers guarantee positive finite weights and finite
    values. The public API with checks and block structure is
    :func:`ordershape.isotonic.pava`.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    if increasing:
        return _impl.pava(v, w)
    return -np.asarray(_impl.pava(-v, w))
