"""Small dense linear algebra over a finite field.

Matrices are numpy arrays of element codes (any integer dtype); all routines
return fresh int64 arrays and never mutate their inputs.  Sizes here are tiny
(at most 7x7), so everything is straightforward Gaussian elimination driven by
the field's tables.
"""

from __future__ import annotations

import numpy as np

from .gf import GF


def rref(K: GF, mat) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns.

    Zero rows are dropped, so the result has exactly ``rank`` rows.  The RREF
    is the canonical representative of the row space.
    """
    A = np.array(mat, dtype=np.int64) % K.q
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if A[i, c]), None)
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        A[r] = K.mul[A[r], K.inverse(int(A[r, c]))]
        for i in range(rows):
            if i != r and A[i, c]:
                factor = K.mul[int(A[i, c])]
                A[i] = K.add[A[i], K.neg[factor[A[r]]]]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return A[:r], pivots


def rank(K: GF, mat) -> int:
    return rref(K, mat)[0].shape[0]


def kernel_basis(K: GF, mat) -> np.ndarray:
    """RREF basis of the right null space of mat (rows are basis vectors)."""
    A, pivots = rref(K, mat)
    cols = np.array(mat, dtype=np.int64).shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for idx, c in enumerate(free):
        basis[idx, c] = 1
        for r, pc in enumerate(pivots):
            basis[idx, pc] = K.neg[A[r, c]]
    if len(basis):
        basis, _ = rref(K, basis)
    return basis


def solve(K: GF, mat, rhs) -> np.ndarray | None:
    """One solution of mat @ x = rhs, or None when inconsistent."""
    A = np.array(mat, dtype=np.int64)
    b = np.array(rhs, dtype=np.int64).reshape(-1, 1)
    R, pivots = rref(K, np.hstack([A, b]))
    cols = A.shape[1]
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.int64)
    for r, c in enumerate(pivots):
        x[c] = R[r, cols]
    return x


def inverse_matrix(K: GF, mat) -> np.ndarray:
    A = np.array(mat, dtype=np.int64)
    n = A.shape[0]
    aug = np.hstack([A, np.eye(n, dtype=np.int64)])
    R, pivots = rref(K, aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return R[:, n:]


def det(K: GF, mat) -> int:
    """Determinant by elimination (tiny matrices, exact)."""
    A = np.array(mat, dtype=np.int64) % K.q
    n = A.shape[0]
    result = 1
    for c in range(n):
        pivot = next((i for i in range(c, n) if A[i, c]), None)
        if pivot is None:
            return 0
        if pivot != c:
            A[[c, pivot]] = A[[pivot, c]]
            result = K.neg_(result)
        result = K.mul_(result, int(A[c, c]))
        inv = K.inverse(int(A[c, c]))
        A[c] = K.mul[A[c], inv]
        for i in range(c + 1, n):
            if A[i, c]:
                factor = K.mul[int(A[i, c])]
                A[i] = K.add[A[i], K.neg[factor[A[c]]]]
    return result


def mat_mul(K: GF, A, B) -> np.ndarray:
    A = np.array(A, dtype=np.int64)
    B = np.array(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for i in range(A.shape[0]):
        for j in range(B.shape[1]):
            acc = 0
            for t in range(A.shape[1]):
                acc = K.add_(acc, K.mul_(int(A[i, t]), int(B[t, j])))
            out[i, j] = acc
    return out


def mat_vec(K: GF, A, v) -> np.ndarray:
    return mat_mul(K, A, np.array(v, dtype=np.int64).reshape(-1, 1))[:, 0]
