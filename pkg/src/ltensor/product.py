"""Facewise and ``*_L`` products, and the objects defined through them.

Every notion here (identity, inverse, conjugate transpose, unitarity) is
relative to a transform ``L`` and is computed slice by slice in the
transform domain.
"""
from __future__ import annotations

import numpy as np

from .core import (
    DenseTensor,
    ShapeError,
    SliceIndexMap,
    as_tensor,
    from_slices,
    frobenius,
    is_tube,
    slices,
)
from .transforms import TransformL

__all__ = [
    "NumericalError",
    "SingularSliceError",
    "facewise_product",
    "t_product_L",
    "identity_tensor",
    "inverse_tensor",
    "conj_transpose",
    "is_unitary_tensor",
    "gram",
    "tube_identity",
    "tube_mul",
    "tube_add",
    "into_real",
]


class NumericalError(ArithmeticError):
    """A numerical step failed (singular slice, SVD non-convergence, ...)."""


class SingularSliceError(NumericalError):
    def __init__(self, index: int, condition: float, where: str = ""):
        self.index = index
        self.condition = condition
        super().__init__(f"{where or f'slice {index}'} is singular (condition estimate {condition:.3g})")


def _facewise(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a: (n1, l, S), b: (l, n2, S)
    return np.einsum("ijs,jks->iks", a, b)


def facewise_product(A, B) -> DenseTensor:
    """Slice-by-slice matrix product ``C'(i) = A'(i) B'(i)``."""
    A, B = as_tensor(A), as_tensor(B)
    if A.trailing_shape != B.trailing_shape:
        raise ShapeError(f"trailing shapes differ: {A.trailing_shape} vs {B.trailing_shape}")
    if A.shape[1] != B.shape[0]:
        raise ShapeError(f"inner dimensions differ: A has {A.shape[1]} columns, B has {B.shape[0]} rows")
    return from_slices(_facewise(slices(A), slices(B)), A.trailing_shape)


def t_product_L(A, B, L: TransformL) -> DenseTensor:
    """``A *_L B = L^{-1}(L(A) facewise L(B))``."""
    A, B = as_tensor(A), as_tensor(B)
    if A.shape[1] != B.shape[0]:
        raise ShapeError(f"inner dimensions differ: A has {A.shape[1]} columns, B has {B.shape[0]} rows")
    if A.trailing_shape != B.trailing_shape:
        raise ShapeError(f"trailing shapes differ: {A.trailing_shape} vs {B.trailing_shape}")
    return L.inverse(facewise_product(L.forward(A), L.forward(B)))


def _identity_hat(n: int, L: TransformL) -> DenseTensor:
    stack = np.broadcast_to(np.eye(n, dtype=np.complex128)[:, :, None], (n, n, L.n_slices))
    return from_slices(stack.copy(), L.trailing_shape)


def identity_tensor(n: int, trailing_shape, L: TransformL) -> DenseTensor:
    """The tensor whose every transform-domain slice is ``I_n``."""
    if tuple(trailing_shape) != L.trailing_shape:
        raise ShapeError(f"trailing shape {tuple(trailing_shape)} does not match transform {L.trailing_shape}")
    return L.inverse(_identity_hat(n, L))


def _square(A: DenseTensor, op: str) -> int:
    if A.shape[0] != A.shape[1]:
        raise ShapeError(f"{op}: leading dims must be equal, got {A.shape[:2]}")
    return A.shape[0]


def inverse_tensor(A, L: TransformL, max_condition: float | None = None) -> DenseTensor:
    """Invert every slice of ``L(A)`` and map back.

    A slice whose condition number exceeds ``max_condition`` (default
    ``1 / (n * eps)``) raises :class:`SingularSliceError`.
    """
    A = as_tensor(A)
    n = _square(A, "inverse_tensor")
    if max_condition is None:
        max_condition = 1.0 / (n * np.finfo(float).eps)
    hat = np.moveaxis(slices(L.forward(A)), 2, 0)
    conds = np.linalg.cond(hat)
    index = SliceIndexMap(A.trailing_shape)
    for i, c in enumerate(conds):
        if not np.isfinite(c) or c > max_condition:
            raise SingularSliceError(i, float(c), index.describe(i))
    inv = np.linalg.inv(hat)
    return L.inverse(from_slices(np.moveaxis(inv, 0, 2), A.trailing_shape))


def conj_transpose(A, L: TransformL) -> DenseTensor:
    """``A^H`` defined by ``L(A^H)'(i) = (L(A)'(i))^H``."""
    A = as_tensor(A)
    hat = slices(L.forward(A))
    return L.inverse(from_slices(np.conj(hat.transpose(1, 0, 2)), A.trailing_shape))


def is_unitary_tensor(Q, L: TransformL, tol: float = 1e-9) -> bool:
    Q = as_tensor(Q)
    n = _square(Q, "is_unitary_tensor")
    eye = identity_tensor(n, Q.trailing_shape, L).data
    Qh = conj_transpose(Q, L)
    left = t_product_L(Qh, Q, L).data
    right = t_product_L(Q, Qh, L).data
    return bool(np.abs(left - eye).max() <= tol and np.abs(right - eye).max() <= tol)


def gram(A, L: TransformL) -> DenseTensor:
    """``A^H *_L A``; its transform-domain slices are Hermitian PSD."""
    A = as_tensor(A)
    return t_product_L(conj_transpose(A, L), A, L)


def _check_tube(a: DenseTensor, L: TransformL | None = None) -> None:
    if not is_tube(a):
        raise ShapeError(f"expected a tube of shape (1, 1, ...), got {a.shape}")
    if L is not None:
        L.check(a)


def tube_identity(L: TransformL) -> DenseTensor:
    return identity_tensor(1, L.trailing_shape, L)


def tube_mul(a, b, L: TransformL) -> DenseTensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_tube(a, L)
    _check_tube(b, L)
    return t_product_L(a, b, L)


def tube_add(a, b) -> DenseTensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_tube(a)
    _check_tube(b)
    return a + b


def into_real(A, tol: float | None = None) -> np.ndarray:
    """Return the real part, refusing to drop imaginary parts above ``tol``.

    ``tol`` defaults to ``1e-9 * frobenius(A)``.
    """
    A = as_tensor(A)
    if tol is None:
        tol = 1e-9 * frobenius(A)
    worst = float(np.abs(A.data.imag).max())
    if worst > tol:
        raise NumericalError(f"imaginary part {worst:.3g} exceeds tolerance {tol:.3g}")
    return A.data.real.copy()
