# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gini split scan for the decision-tree builder.

Contract (mirrored bit for bit by the pure backend in `_reference.py`):
features are scanned in ascending column order, candidate thresholds sit at
midpoints between distinct adjacent sorted values, and a strictly greater
gain replaces the incumbent. Labels are binary (0/1).
"""

from libc.stdlib cimport free, malloc, qsort


cdef struct ValLab:
    double v
    unsigned char y


cdef int _cmp_vallab(const void* a, const void* b) noexcept nogil:
    cdef double av = (<const ValLab*> a).v
    cdef double bv = (<const ValLab*> b).v
    if av < bv:
        return -1
    if av > bv:
        return 1
    return 0


def best_split(const double[:, ::1] x, const unsigned char[:] y, int min_leaf):
    """Return (feature_index, threshold, gain) for the best Gini split.

    `x` is the node's (m, f) candidate-feature block, `y` the binary labels.
    feature_index is -1 when no valid split exists (all columns constant or
    min_leaf unsatisfiable).
    """
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t f = x.shape[1]
    cdef Py_ssize_t i, j, p
    cdef long n1 = 0, c1, nl, nr, c1l, c1r
    cdef double parent, gl, gr, child, gain
    # Any valid threshold is acceptable, even at zero improvement (Gini gain
    # is never negative up to rounding), matching standard tree builders.
    cdef double best_gain = -1.0
    cdef Py_ssize_t best_feat = -1
    cdef double best_thr = 0.0
    cdef ValLab* buf

    if m < 2 or f == 0:
        return -1, 0.0, 0.0
    for i in range(m):
        n1 += y[i]
    if n1 == 0 or n1 == m:
        return -1, 0.0, 0.0
    parent = 1.0 - ((<double> n1) / (<double> m)) ** 2 \
        - ((<double> (m - n1)) / (<double> m)) ** 2

    buf = <ValLab*> malloc(m * sizeof(ValLab))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(f):
                for i in range(m):
                    buf[i].v = x[i, j]
                    buf[i].y = y[i]
                qsort(buf, m, sizeof(ValLab), _cmp_vallab)
                c1 = 0
                for p in range(1, m):
                    c1 += buf[p - 1].y
                    if buf[p - 1].v == buf[p].v:
                        continue
                    if p < min_leaf or m - p < min_leaf:
                        continue
                    nl = p
                    nr = m - p
                    c1l = c1
                    c1r = n1 - c1
                    gl = 1.0 - ((<double> c1l) / (<double> nl)) ** 2 \
                        - ((<double> (nl - c1l)) / (<double> nl)) ** 2
                    gr = 1.0 - ((<double> c1r) / (<double> nr)) ** 2 \
                        - ((<double> (nr - c1r)) / (<double> nr)) ** 2
                    child = ((<double> nl) * gl + (<double> nr) * gr) / (<double> m)
                    gain = parent - child
                    if gain > best_gain:
                        best_gain = gain
                        best_feat = j
                        best_thr = (buf[p - 1].v + buf[p].v) / 2.0
                        # Midpoints of adjacent floats can round down onto the
                        # left value; bump so the `x < thr` routing rule keeps
                        # both children non-empty.
                        if best_thr <= buf[p - 1].v:
                            best_thr = buf[p].v
    finally:
        free(buf)

    if best_feat < 0:
        return -1, 0.0, 0.0
    return int(best_feat), best_thr, best_gain
