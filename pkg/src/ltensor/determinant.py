"""Tube-valued tensor determinants."""
from __future__ import annotations

import numpy as np

from .core import DenseTensor, ShapeError, as_tensor, from_slices, slices
from .product import tube_mul
from .transforms import TransformL

__all__ = ["det_recursive", "det_fast", "identity_det_tube", "MAX_RECURSIVE_N"]

MAX_RECURSIVE_N = 8


def _square(A: DenseTensor) -> int:
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"determinant needs equal leading dims, got {A.shape[:2]}")
    return A.shape[0]


def _tube(A: DenseTensor, i: int, j: int) -> DenseTensor:
    return DenseTensor._wrap(A.data[i:i + 1, j:j + 1].copy())


def _minor(A: DenseTensor, j: int) -> DenseTensor:
    # delete row 0 and column j of every slice
    keep = [c for c in range(A.shape[1]) if c != j]
    return DenseTensor._wrap(A.data[1:][:, keep].copy())


def det_recursive(A, L: TransformL) -> DenseTensor:
    """Cofactor expansion along the first row, with ``*_L`` between tubes.

    Exponential in ``n``; capped at ``n <= 8``. Meant to validate
    :func:`det_fast`.
    """
    A = as_tensor(A)
    n = _square(A)
    if n > MAX_RECURSIVE_N:
        raise ValueError(f"det_recursive is limited to n <= {MAX_RECURSIVE_N}, got n = {n}")
    L.check(A)
    return _det_rec(A, L)


def _det_rec(A: DenseTensor, L: TransformL) -> DenseTensor:
    n = A.shape[0]
    if n == 1:
        return _tube(A, 0, 0)
    if n == 2:
        return tube_mul(_tube(A, 0, 0), _tube(A, 1, 1), L) - tube_mul(_tube(A, 0, 1), _tube(A, 1, 0), L)
    total = None
    for j in range(n):
        term = tube_mul(_tube(A, 0, j), _det_rec(_minor(A, j), L), L)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def det_fast(A, L: TransformL) -> DenseTensor:
    """``L^{-1}`` of the tube of slice determinants of ``L(A)`` (LU per slice)."""
    A = as_tensor(A)
    _square(A)
    hat = np.moveaxis(slices(L.forward(A)), 2, 0)
    d = np.linalg.det(hat)
    return L.inverse(from_slices(d.reshape(1, 1, -1), A.trailing_shape))


def identity_det_tube(L: TransformL) -> DenseTensor:
    """``L^{-1}`` of the all-ones tube: the determinant of every identity tensor."""
    ones = np.ones((1, 1, L.n_slices), dtype=np.complex128)
    return L.inverse(from_slices(ones, L.trailing_shape))
