"""Pure-Python versions of the compiled kernels in ``_ckernels.pyx``."""

from itertools import combinations

import numpy as np


def _rank_rows(w, q):
    rank = 0
    ncols = len(w[0]) if w else 0
    nrows = len(w)
    for c in range(ncols):
        if rank == nrows:
            break
        piv = next((i for i in range(rank, nrows) if w[i][c]), None)
        if piv is None:
            continue
        w[rank], w[piv] = w[piv], w[rank]
        inv = pow(w[rank][c], -1, q)
        prow = [(x * inv) % q for x in w[rank]]
        w[rank] = prow
        for i in range(rank + 1, nrows):
            f = w[i][c]
            if f:
                row = w[i]
                w[i] = [(x - f * y) % q for x, y in zip(row, prow)]
        rank += 1
    return rank


def rank_mod(a, q):
    rows = [[int(x) for x in row] for row in a]
    return _rank_rows(rows, int(q))


def audit_scan(g, R, z, q, exhaustive):
    rows = [[int(x) for x in row] for row in g]
    q = int(q)
    if z == 0:
        return 1, 0, None, -1, -1
    checked = violations = 0
    first, first_ab, first_b = None, -1, -1
    for subset in combinations(range(len(rows)), z):
        sel = [rows[i] for i in subset]
        rab = _rank_rows([list(r) for r in sel], q)
        rb = _rank_rows([r[R:] for r in sel], q)
        checked += 1
        if rab != rb:
            violations += 1
            if first is None:
                first, first_ab, first_b = subset, rab, rb
                if not exhaustive:
                    break
    return checked, violations, first, first_ab, first_b


def rank_batch(a, q):
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros(a.shape[0], dtype=np.int64)
    if a.shape[1] == 0 or a.shape[2] == 0:
        return out
    for b in range(a.shape[0]):
        out[b] = _rank_rows(a[b].tolist(), int(q))
    return out
