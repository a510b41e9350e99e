"""Naive reference implementation of the classical t-product.

Test support only. Nothing here touches the slice, transform or product
code of the main path; tensors are handled as plain numpy arrays, and the
DFT matrices are built locally.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "bcirc",
    "mat_vec",
    "fold",
    "t_product_classic",
    "transpose_classic",
    "nested_bcirc",
    "verify_block_diagonalization",
    "BlockDiagonalizationReport",
    "MAX_ORACLE_ROWS",
]

MAX_ORACLE_ROWS = 4096


def _arr(A) -> np.ndarray:
    arr = np.asarray(A)
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64)
    return arr


def _frontal(A: np.ndarray, k: int) -> np.ndarray:
    return A[:, :, k]


def bcirc(A) -> np.ndarray:
    """Block-circulant matrix; block ``(r, c)`` is frontal slice ``(r - c) mod n3``."""
    A = _arr(A)
    if A.ndim != 3:
        raise ValueError(f"bcirc needs a third-order tensor, got order {A.ndim}")
    n1, n2, n3 = A.shape
    M = np.zeros((n1 * n3, n2 * n3), dtype=A.dtype)
    for r in range(n3):
        for c in range(n3):
            M[r * n1:(r + 1) * n1, c * n2:(c + 1) * n2] = _frontal(A, (r - c) % n3)
    return M


def mat_vec(A) -> np.ndarray:
    """Stack the frontal slices vertically."""
    A = _arr(A)
    if A.ndim != 3:
        raise ValueError(f"mat_vec needs a third-order tensor, got order {A.ndim}")
    n1, n2, n3 = A.shape
    M = np.zeros((n1 * n3, n2), dtype=A.dtype)
    for k in range(n3):
        M[k * n1:(k + 1) * n1, :] = _frontal(A, k)
    return M


def fold(M, n1: int, n2: int, n3: int) -> np.ndarray:
    M = np.asarray(M)
    if M.shape != (n1 * n3, n2):
        raise ValueError(f"fold: expected matrix of shape {(n1 * n3, n2)}, got {M.shape}")
    A = np.zeros((n1, n2, n3), dtype=M.dtype)
    for k in range(n3):
        A[:, :, k] = M[k * n1:(k + 1) * n1, :]
    return A


def _naive_matmul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # explicit accumulation keeps the oracle free of BLAS-shared code paths
    m, l = X.shape
    l2, n = Y.shape
    if l != l2:
        raise ValueError(f"inner dimensions differ: {l} vs {l2}")
    out = np.zeros((m, n), dtype=np.result_type(X, Y))
    for k in range(l):
        out += np.multiply.outer(X[:, k], Y[k, :])
    return out


def t_product_classic(A, B) -> np.ndarray:
    """``fold(bcirc(A) @ mat_vec(B))`` for third-order tensors."""
    A, B = _arr(A), _arr(B)
    if A.ndim != 3 or B.ndim != 3:
        raise ValueError("t_product_classic needs third-order tensors")
    n1, l, n3 = A.shape
    if B.shape[0] != l or B.shape[2] != n3:
        raise ValueError(f"shape mismatch: {A.shape} and {B.shape}")
    return fold(_naive_matmul(bcirc(A), mat_vec(B)), n1, B.shape[1], n3)


def transpose_classic(A) -> np.ndarray:
    """Transpose each frontal slice and reverse the order of slices 2..n3."""
    A = _arr(A)
    n3 = A.shape[2]
    out = np.empty((A.shape[1], A.shape[0], n3), dtype=A.dtype)
    out[:, :, 0] = A[:, :, 0].T.conj()
    for k in range(1, n3):
        out[:, :, k] = A[:, :, n3 - k].T.conj()
    return out


def nested_bcirc(A) -> np.ndarray:
    """Recursive block-circulant embedding over axes 3..p.

    Axis 3 is the innermost level, axis p the outermost; an order-2 array is
    returned as is.
    """
    A = _arr(A)
    if A.ndim == 2:
        return A.copy()
    n = A.shape[-1]
    blocks = [nested_bcirc(A[..., k]) for k in range(n)]
    r, c = blocks[0].shape
    M = np.zeros((r * n, c * n), dtype=A.dtype)
    for i in range(n):
        for j in range(n):
            M[i * r:(i + 1) * r, j * c:(j + 1) * c] = blocks[(i - j) % n]
    return M


def _dft(n: int) -> np.ndarray:
    F = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        for k in range(n):
            F[j, k] = np.exp(-2j * np.pi * ((j * k) % n) / n)
    return F


def _kron_all(mats):
    out = np.ones((1, 1), dtype=np.complex128)
    for M in mats:
        out = np.kron(out, M)
    return out


def _fft_slices(A: np.ndarray) -> np.ndarray:
    """Transform-domain slices via numpy.fft along every trailing axis.

    Returned as an ``(S, n1, n2)`` stack with axis 3 varying fastest.
    """
    hat = np.fft.fftn(A, axes=tuple(range(2, A.ndim))) if A.ndim > 2 else A
    n1, n2 = A.shape[:2]
    return hat.reshape(n1, n2, -1, order="F").transpose(2, 0, 1)


@dataclass(frozen=True)
class BlockDiagonalizationReport:
    off_block: float
    block_error: float
    blocks: np.ndarray = field(repr=False)


def verify_block_diagonalization(A, kind: str = "third_order") -> BlockDiagonalizationReport:
    """Conjugate the (nested) block-circulant by Kronecker DFT factors.

    ``third_order``: ``(F_{n3} x I_{n1}) bcirc(A) (F_{n3}^{-1} x I_{n2})``.
    ``p_order``: ``(F_{np} x ... x F_{n3} x I_{n1}) A~ (F_{np}^{-1} x ... x I_{n2})``.

    ``off_block`` is the largest magnitude outside the diagonal blocks;
    ``block_error`` the relative Frobenius mismatch between the diagonal
    blocks and the fft slices of ``A``.
    """
    A = _arr(A)
    if kind == "third_order":
        if A.ndim != 3:
            raise ValueError(f"third_order check needs p = 3, got p = {A.ndim}")
    elif kind != "p_order":
        raise ValueError(f"unknown kind {kind!r}")
    n1, n2 = A.shape[:2]
    trailing = A.shape[2:]
    S = int(np.prod(trailing)) if trailing else 1
    if n1 * S > MAX_ORACLE_ROWS or n2 * S > MAX_ORACLE_ROWS:
        raise MemoryError(f"refusing dense oracle with {n1 * S} rows (limit {MAX_ORACLE_ROWS})")

    big = nested_bcirc(A) if kind == "p_order" else bcirc(A)
    Fs = [_dft(n) for n in reversed(trailing)]
    left = np.kron(_kron_all(Fs), np.eye(n1))
    right = np.kron(_kron_all([np.linalg.inv(F) for F in Fs]), np.eye(n2))
    D = left @ big @ right

    mask = np.zeros(D.shape, dtype=bool)
    blocks = np.empty((S, n1, n2), dtype=np.complex128)
    for i in range(S):
        mask[i * n1:(i + 1) * n1, i * n2:(i + 1) * n2] = True
        blocks[i] = D[i * n1:(i + 1) * n1, i * n2:(i + 1) * n2]
    off = float(np.abs(D[~mask]).max()) if (~mask).any() else 0.0

    expected = _fft_slices(A)
    scale = max(np.linalg.norm(expected), np.finfo(float).tiny)
    return BlockDiagonalizationReport(off, float(np.linalg.norm(blocks - expected) / scale), blocks)
