"""Pure-numpy twin of the compiled split kernel.

Selected automatically when the extension is unavailable (or forced via
``DEBIAS_CLR_PURE_PYTHON=1``). Scan order, tie-breaking, and the arithmetic
expression for the gain match `_split.pyx` exactly, so both backends grow
identical trees.
"""

from __future__ import annotations

import numpy as np


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Return (feature_index, threshold, gain) for the best Gini split.

    Same contract as the compiled kernel: `x` is the node's (m, f) block of
    candidate features, `y` holds binary labels. feature_index is -1 when no
    valid split exists (pure labels, constant columns, or min_leaf).
    """
    m, f = x.shape
    if m < 2 or f == 0:
        return -1, 0.0, 0.0
    n1 = int(y.sum())
    if n1 == 0 or n1 == m:
        return -1, 0.0, 0.0
    parent = 1.0 - (n1 / m) ** 2 - ((m - n1) / m) ** 2

    order = np.argsort(x, axis=0, kind="stable")
    xs = np.take_along_axis(x, order, axis=0)
    ys = y[order].astype(np.int64)

    nl = np.arange(1, m, dtype=np.int64)[:, None]
    nr = m - nl
    c1l = np.cumsum(ys, axis=0)[:-1]
    c1r = n1 - c1l
    gl = 1.0 - (c1l / nl) ** 2 - ((nl - c1l) / nl) ** 2
    gr = 1.0 - (c1r / nr) ** 2 - ((nr - c1r) / nr) ** 2
    child = (nl * gl + nr * gr) / m
    gain = parent - child

    valid = xs[1:] > xs[:-1]
    if min_leaf > 1:
        valid &= (nl >= min_leaf) & (nr >= min_leaf)
    gain = np.where(valid, gain, -np.inf)

    # Feature-major flattening reproduces the compiled scan order, so the
    # first argmax lands on the same (feature, position) under ties. Any
    # valid threshold is acceptable, even at zero improvement.
    flat = gain.T.ravel()
    k = int(np.argmax(flat))
    best = flat[k]
    if best == -np.inf:
        return -1, 0.0, 0.0
    feat = k // (m - 1)
    p = k % (m - 1) + 1
    threshold = (xs[p - 1, feat] + xs[p, feat]) / 2.0
    if threshold <= xs[p - 1, feat]:
        # Adjacent-float midpoint rounded onto the left value; bump so the
        # `x < thr` routing rule keeps both children non-empty.
        threshold = xs[p, feat]
    return feat, float(threshold), float(best)
