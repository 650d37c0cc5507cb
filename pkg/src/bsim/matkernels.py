"""Dense complex matrix functions used by every probability law.

Permanents use Glynn's formula over a Gray-code walk of the sign vectors,
Hafnians a recursion that pairs the first remaining index with every other
one. Both inner loops are compiled with numba.
"""

from __future__ import annotations

import os
from typing import Sequence

import numba
import numpy as np
import scipy.linalg

PERMANENT_CAP = 18
HAFNIAN_CAP = 16
SYMMETRY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
# compensated summation switches on above this size
KAHAN_THRESHOLD = 10

# the TBB layer shipped with some distributions is too old and warns on import
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
if os.environ.get("BSIM_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["BSIM_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


class MatrixShapeError(ValueError):
    """Input matrix has the wrong shape for the requested operation."""


class CapExceededError(ValueError):
    """Matrix dimension exceeds the configured kernel cap."""


def as_complex_matrix(m) -> np.ndarray:
    """Return `m` as a 2-d complex128 array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise MatrixShapeError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_pattern(occupations: Sequence[int]) -> tuple[int, ...]:
    """Normalise an occupation sequence to a tuple of non-negative ints."""
    out = tuple(int(k) for k in occupations)
    if any(k < 0 for k in out):
        raise ValueError(f"negative occupation in pattern {out}")
    return out


def is_collision_free(pattern: Sequence[int]) -> bool:
    return all(k <= 1 for k in pattern)


@numba.njit(cache=True)
def _glynn(a, compensated):
    n = a.shape[0]
    colsum = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            colsum[j] += a[i, j]
    delta = np.ones(n, dtype=np.int64)

    prod = 1.0 + 0.0j
    for j in range(n):
        prod *= colsum[j]
    total = prod
    comp = 0.0 + 0.0j
    sign = 1.0

    for g in range(1, 1 << (n - 1)):
        # lowest set bit of g selects the row whose sign flips
        b = 0
        while not (g >> b) & 1:
            b += 1
        row = b + 1
        if delta[row] == 1:
            for j in range(n):
                colsum[j] -= 2.0 * a[row, j]
        else:
            for j in range(n):
                colsum[j] += 2.0 * a[row, j]
        delta[row] = -delta[row]
        sign = -sign
        prod = 1.0 + 0.0j
        for j in range(n):
            prod *= colsum[j]
        term = sign * prod
        if compensated:
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
        else:
            total += term
    return total / (1 << (n - 1))


def permanent(m, cap: int = PERMANENT_CAP) -> complex:
    """Permanent of a square matrix, O(2^n n).

    Raises
    ------
    MatrixShapeError
        If the matrix is not square.
    CapExceededError
        If n exceeds `cap`.
    """
    a = as_complex_matrix(m)
    n, k = a.shape
    if n != k:
        raise MatrixShapeError(f"permanent needs a square matrix, got {a.shape}")
    if n > cap:
        raise CapExceededError(f"permanent of size {n} exceeds cap {cap}")
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return complex(a[0, 0])
    if n == 2:
        return complex(a[0, 0] * a[1, 1] + a[0, 1] * a[1, 0])
    return complex(_glynn(np.ascontiguousarray(a), n > KAHAN_THRESHOLD))


@numba.njit(cache=True)
def _haf_rec(a, idx):
    # Depth-first walk over perfect matchings of the positions in idx. Level d
    # pairs the first free position first[d] with partner[d]; prod[d] is the
    # product of the d pairs fixed above it.
    n = idx.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    half = n // 2
    used = np.zeros(n, dtype=np.bool_)
    first = np.zeros(half, dtype=np.int64)
    partner = np.zeros(half, dtype=np.int64)
    prod = np.ones(half + 1, dtype=np.complex128)
    total = 0.0 + 0.0j
    d = 0
    used[0] = True
    partner[0] = 0
    while d >= 0:
        i = first[d]
        if partner[d] > i:
            used[partner[d]] = False
        p = partner[d] + 1 if partner[d] > i else i + 1
        while p < n and used[p]:
            p += 1
        if p == n:
            used[i] = False
            d -= 1
            continue
        partner[d] = p
        used[p] = True
        prod[d + 1] = prod[d] * a[idx[i], idx[p]]
        if d + 1 == half:
            total += prod[d + 1]
        elif prod[d + 1] != 0:
            d += 1
            q = 0
            while used[q]:
                q += 1
            first[d] = q
            partner[d] = q
            used[q] = True
    return total


@numba.njit(cache=True, parallel=True)
def _haf_abs2_batch(a, pats):
    out = np.zeros(pats.shape[0])
    for r in numba.prange(pats.shape[0]):
        n = 0
        for i in range(pats.shape[1]):
            n += pats[r, i]
        if n % 2:
            continue
        idx = np.empty(n, dtype=np.int64)
        q = 0
        for i in range(pats.shape[1]):
            for _ in range(pats[r, i]):
                idx[q] = i
                q += 1
        h = _haf_rec(a, idx)
        out[r] = h.real * h.real + h.imag * h.imag
    return out


def check_symmetric(a: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    if a.shape[0] != a.shape[1]:
        raise MatrixShapeError(f"expected a square matrix, got {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > tol:
        raise ValueError("matrix is not symmetric within tolerance")


def hafnian(m, cap: int = HAFNIAN_CAP) -> complex:
    """Hafnian of an even-dimensional symmetric matrix.

    Sums over perfect matchings; the diagonal never enters. The 0x0
    Hafnian is 1.
    """
    a = as_complex_matrix(m)
    n = a.shape[0]
    check_symmetric(a)
    if n % 2:
        raise MatrixShapeError(f"hafnian needs even dimension, got {n}")
    if n > cap:
        raise CapExceededError(f"hafnian of size {n} exceeds cap {cap}")
    if n == 0:
        return 1.0 + 0.0j
    return complex(_haf_rec(np.ascontiguousarray(a), np.arange(n, dtype=np.int64)))


def hafnian_abs2_batch(m, patterns, cap: int = HAFNIAN_CAP) -> np.ndarray:
    """|Haf(m_k)|^2 for every row k of `patterns`; odd totals give 0.

    m_k repeats row and column i of the symmetric matrix `m` k_i times.
    Rows are evaluated in parallel.
    """
    a = as_complex_matrix(m)
    check_symmetric(a)
    pats = np.ascontiguousarray(np.asarray(patterns, dtype=np.int64).reshape(-1, a.shape[0]))
    if pats.size and pats.sum(axis=1).max() > cap:
        raise CapExceededError(f"hafnian of size {pats.sum(axis=1).max()} exceeds cap {cap}")
    if pats.size and pats.min() < 0:
        raise ValueError("negative occupation in pattern")
    return _haf_abs2_batch(np.ascontiguousarray(a), pats)


def expand_indices(counts: Sequence[int]) -> np.ndarray:
    """Index list with index i repeated counts[i] times, in order."""
    counts = np.asarray(as_pattern(counts), dtype=np.int64)
    return np.repeat(np.arange(len(counts), dtype=np.int64), counts)


def repeat_submatrix(m, row_counts: Sequence[int], col_counts: Sequence[int]) -> np.ndarray:
    """Repeat row i of `m` row_counts[i] times and column j col_counts[j] times."""
    a = as_complex_matrix(m)
    if len(row_counts) != a.shape[0] or len(col_counts) != a.shape[1]:
        raise MatrixShapeError(
            f"count lengths ({len(row_counts)}, {len(col_counts)}) do not match "
            f"matrix shape {a.shape}"
        )
    return a[np.ix_(expand_indices(row_counts), expand_indices(col_counts))]


def determinant(m) -> complex:
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise MatrixShapeError(f"determinant needs a square matrix, got {a.shape}")
    return complex(np.linalg.det(a))


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (u_left, sigma, u_right) with m = u_left @ diag(sigma) @ u_right.T.

    Singular values are non-negative and sorted in descending order. Real
    input gives real orthogonal factors.
    """
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise MatrixShapeError(f"svd needs a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    u, s, vh = np.linalg.svd(a)
    return u, s, vh.T


def matrix_exp(h, scale: float = 1.0) -> np.ndarray:
    """exp(i * scale * h) for Hermitian h."""
    a = as_complex_matrix(h)
    if a.shape[0] != a.shape[1]:
        raise MatrixShapeError(f"matrix_exp needs a square matrix, got {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise ValueError("generator is not Hermitian within tolerance")
    return scipy.linalg.expm(1j * scale * a)
