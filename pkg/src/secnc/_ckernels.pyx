# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: modular rank and the z-subset wiretap scan."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline int64_t _inv(int64_t a, int64_t q) noexcept nogil:
    cdef int64_t t = 0, newt = 1, r = q, newr = a, quot, tmp
    while newr != 0:
        quot = r // newr
        tmp = t - quot * newt
        t = newt
        newt = tmp
        tmp = r - quot * newr
        r = newr
        newr = tmp
    if t < 0:
        t += q
    return t


cdef int _rank_inplace(int64_t[:, ::1] w, Py_ssize_t nrows, Py_ssize_t ncols,
                       int64_t q) noexcept nogil:
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef int64_t inv, f, tmp
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if w[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, ncols):
                tmp = w[r, j]
                w[r, j] = w[piv, j]
                w[piv, j] = tmp
        inv = _inv(w[r, c], q)
        for j in range(c, ncols):
            w[r, j] = (w[r, j] * inv) % q
        for i in range(r + 1, nrows):
            f = w[i, c]
            if f != 0:
                for j in range(c, ncols):
                    w[i, j] = (w[i, j] - f * w[r, j]) % q
                    if w[i, j] < 0:
                        w[i, j] += q
        r += 1
    return <int>r


def rank_mod(a, long long q):
    cdef int64_t[:, ::1] w = np.array(a, dtype=np.int64, order="C", copy=True)
    return _rank_inplace(w, w.shape[0], w.shape[1], q)


def audit_scan(g, int R, int z, long long q, bint exhaustive):
    """Scan all z-subsets of the rows of ``g`` in lexicographic order.

    Returns ``(checked, violations, first_subset, rank_ab, rank_b)``.
    """
    cdef int64_t[:, ::1] rows = np.ascontiguousarray(g, dtype=np.int64)
    cdef Py_ssize_t n_edges = rows.shape[0]
    cdef Py_ssize_t width = R + z
    cdef Py_ssize_t i, j, k
    cdef long long checked = 0, violations = 0
    cdef int rab, rb
    first = None
    first_ab = -1
    first_b = -1
    if z == 0:
        return 1, 0, None, -1, -1
    if z > n_edges:
        return 0, 0, None, -1, -1
    cdef Py_ssize_t[::1] idx = np.arange(z, dtype=np.intp)
    cdef int64_t[:, ::1] wab = np.empty((z, width), dtype=np.int64)
    cdef int64_t[:, ::1] wb = np.empty((z, z), dtype=np.int64)
    while True:
        for i in range(z):
            for j in range(width):
                wab[i, j] = rows[idx[i], j]
            for j in range(z):
                wb[i, j] = rows[idx[i], R + j]
        rab = _rank_inplace(wab, z, width, q)
        rb = _rank_inplace(wb, z, z, q)
        checked += 1
        if rab != rb:
            violations += 1
            if first is None:
                first = tuple(int(idx[k]) for k in range(z))
                first_ab = rab
                first_b = rb
                if not exhaustive:
                    break
        # advance to the next combination
        i = z - 1
        while i >= 0 and idx[i] == n_edges - z + i:
            i -= 1
        if i < 0:
            break
        idx[i] += 1
        for j in range(i + 1, z):
            idx[j] = idx[j - 1] + 1
    return checked, violations, first, first_ab, first_b


def rank_batch(a, long long q):
    """Rank of each ``a[b]`` for a stack of matrices shaped ``(batch, rows, cols)``."""
    cdef int64_t[:, :, ::1] src = np.ascontiguousarray(a, dtype=np.int64)
    cdef Py_ssize_t nb = src.shape[0], nr = src.shape[1], nc = src.shape[2]
    cdef Py_ssize_t b, i, j
    out_arr = np.zeros(nb, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    if nr == 0 or nc == 0:
        return out_arr
    cdef int64_t[:, ::1] w = np.empty((nr, nc), dtype=np.int64)
    for b in range(nb):
        for i in range(nr):
            for j in range(nc):
                w[i, j] = src[b, i, j]
        out[b] = _rank_inplace(w, nr, nc, q)
    return out_arr
