"""Prime-field arithmetic and dense matrices over F_q.

Matrices are 2-D ``numpy.int64`` arrays whose entries lie in ``[0, q)``.
All reductions are exact; nothing here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

# residues are multiplied in int64, so q^2 must fit
MAX_MODULUS = 2**31


class FieldError(ValueError):
    pass


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    q: int

    def __post_init__(self):
        q = self.q
        if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
            raise FieldError(f"field size must be an integer, got {q!r}")
        object.__setattr__(self, "q", int(q))
        if not is_prime(self.q):
            raise FieldError(f"field size {q} is not prime")
        if self.q >= MAX_MODULUS:
            raise FieldError(f"field size {q} exceeds supported maximum 2^31")

    def inv(self, a: int) -> int:
        return ff_inv(a, self)


def ff_inv(a: int, f: FieldSpec) -> int:
    a = int(a) % f.q
    if a == 0:
        raise FieldError("no inverse of zero")
    return pow(a, -1, f.q)


def as_matrix(data, f: FieldSpec, cols: int | None = None) -> np.ndarray:
    """Validate ``data`` as a matrix over ``f``; entries must already be reduced."""
    m = np.array(data, dtype=np.int64)
    if m.ndim == 1 and m.size == 0:
        m = m.reshape(0, 0 if cols is None else cols)
    if m.ndim != 2:
        raise FieldError(f"matrix must be 2-dimensional, got shape {m.shape}")
    if m.size and (m.min() < 0 or m.max() >= f.q):
        raise FieldError(f"matrix entries must lie in [0, {f.q})")
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def mat_rank(m: np.ndarray, f: FieldSpec) -> int:
    m = np.asarray(m, dtype=np.int64)
    if m.ndim != 2:
        raise FieldError("rank needs a 2-D matrix")
    if m.shape[0] == 0 or m.shape[1] == 0:
        return 0
    return kernels.rank_mod(m, f.q)


def rowspace_contains(m: np.ndarray, probe: np.ndarray, f: FieldSpec) -> bool:
    """True iff every row of ``probe`` lies in the row space of ``m``."""
    m = np.asarray(m, dtype=np.int64)
    probe = np.asarray(probe, dtype=np.int64)
    if m.shape[1] != probe.shape[1]:
        raise FieldError(
            f"column mismatch: matrix has {m.shape[1]}, probe has {probe.shape[1]}"
        )
    return mat_rank(np.vstack([m, probe]), f) == mat_rank(m, f)


def _fits_int64(inner: int, q: int) -> bool:
    return (q - 1) ** 2 * max(inner, 1) < 2**63


def mat_mul(a: np.ndarray, b: np.ndarray, f: FieldSpec) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise FieldError(f"cannot multiply shapes {a.shape} and {b.shape}")
    if _fits_int64(a.shape[1], f.q):
        return (a @ b) % f.q
    prod = (a.astype(object) @ b.astype(object)) % f.q
    return prod.astype(np.int64)


def random_matrix(rows: int, cols: int, f: FieldSpec, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform entries.

    ``Generator.integers`` draws bounded values by rejection on the native
    word, so there is no modulo bias.
    """
    if rows < 0 or cols < 0:
        raise FieldError("matrix dimensions must be non-negative")
    return rng.integers(0, f.q, size=(rows, cols), dtype=np.int64)


def rref(m: np.ndarray, f: FieldSpec):
    """Reduced row echelon form with the row operations that produced it.

    Returns ``(reduced, pivots, transform)`` where ``transform @ m == reduced``.
    """
    q = f.q
    work = [[int(x) for x in row] for row in np.asarray(m, dtype=np.int64)]
    nrows = len(work)
    ncols = np.asarray(m).shape[1]
    trans = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        trans[r], trans[piv] = trans[piv], trans[r]
        inv = pow(work[r][c], -1, q)
        work[r] = [x * inv % q for x in work[r]]
        trans[r] = [x * inv % q for x in trans[r]]
        for i in range(nrows):
            if i != r and work[i][c]:
                fac = work[i][c]
                work[i] = [(x - fac * y) % q for x, y in zip(work[i], work[r])]
                trans[i] = [(x - fac * y) % q for x, y in zip(trans[i], trans[r])]
        pivots.append(c)
        r += 1
    reduced = np.array(work, dtype=np.int64).reshape(nrows, ncols)
    transform = np.array(trans, dtype=np.int64).reshape(nrows, nrows)
    return reduced, pivots, transform


def solve_left(m: np.ndarray, target: np.ndarray, f: FieldSpec) -> np.ndarray:
    """Find ``x`` with ``x @ m == target`` (mod q).

    Raises FieldError if some row of ``target`` is outside the row space of ``m``.
    """
    m = np.asarray(m, dtype=np.int64)
    target = np.asarray(target, dtype=np.int64)
    if m.shape[1] != target.shape[1]:
        raise FieldError("column mismatch in solve_left")
    reduced, pivots, transform = rref(m, f)
    q = f.q
    out = np.zeros((target.shape[0], m.shape[0]), dtype=np.int64)
    for k, t in enumerate(target):
        coeffs = np.array([int(t[c]) for c in pivots], dtype=np.int64)
        if pivots:
            recon = mat_mul(coeffs.reshape(1, -1), reduced[: len(pivots)], f)[0]
        else:
            recon = np.zeros(m.shape[1], dtype=np.int64)
        if not np.array_equal(recon, t % q):
            raise FieldError(f"row {k} of target is not in the row space")
        if pivots:
            out[k] = mat_mul(coeffs.reshape(1, -1), transform[: len(pivots)], f)[0]
    return out
