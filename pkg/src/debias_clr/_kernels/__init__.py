"""Hot-kernel backend selection.

The decision-tree split scan is the one loop in this package that neither
BLAS nor vectorized numpy handles well at tree-node granularity, so it ships
as a compiled extension with a pure-numpy fallback. The backend is chosen
once at import: the extension if it built, otherwise the reference version.
Set ``DEBIAS_CLR_PURE_PYTHON=1`` to force the fallback (used by tests and
the backend benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _reference

_FORCED_PURE = os.environ.get("DEBIAS_CLR_PURE_PYTHON", "") == "1"

if not _FORCED_PURE:
    try:
        from . import _split as _compiled
    except ImportError:
        _compiled = None
else:
    _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_IMPL = _compiled.best_split if _compiled is not None else _reference.best_split


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int = 1):
    """Best Gini split of a node block; see `_reference.best_split`."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.uint8)
    return _IMPL(x, y, int(min_leaf))


def available_backends() -> dict:
    """Map backend name -> split function, for parity tests and benchmarks."""
    backends = {"python": _reference.best_split}
    try:
        from . import _split

        backends["compiled"] = _split.best_split
    except ImportError:
        pass
    return backends
