"""Dense p-order tensors, matrix slices and mode products.

Indexing conventions
--------------------
* Element and slice indices in the Python API are 0-based.
* Mode numbers are 1-based, as in ``A x_3 T``: ``mode_m_product(A, T, 3)``
  acts on the third axis (``A.data.shape[2]``).
* Storage is linearized first-index-fastest (Fortran order). The 1-based
  element ``(i_1, ..., i_p)`` lives at flat offset
  ``sum_k (i_k - 1) * prod_{j<k} n_j``.
* Matrix slices are numbered by the same rule applied to the trailing
  indices ``(i_3, ..., i_p)``: slice ``i`` (0-based) is
  ``A[:, :, *np.unravel_index(i, (n_3, ..., n_p), order="F")]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ShapeError",
    "DenseTensor",
    "SliceIndexMap",
    "as_tensor",
    "zeros",
    "from_slices",
    "slices",
    "mode_m_product",
    "matrix_slice",
    "set_matrix_slice",
    "add",
    "sub",
    "scale",
    "conj",
    "inner",
    "frobenius",
    "l1_norm",
    "linf_norm",
    "is_tube",
]


class ShapeError(ValueError):
    """Operand shapes do not conform."""


class DenseTensor:
    """Immutable complex128 tensor of order ``p >= 2``.

    The wrapped array is a private read-only copy; every operation returns a
    new tensor. ``np.asarray(A)`` gives the (read-only) array view.
    """

    __slots__ = ("_data",)
    __array_priority__ = 1000

    def __init__(self, data):
        arr = np.array(data, dtype=np.complex128, copy=True)
        if arr.ndim < 2:
            raise ShapeError(f"tensor order must be >= 2, got shape {arr.shape}")
        if any(n < 1 for n in arr.shape):
            raise ShapeError(f"every dimension must be >= 1, got shape {arr.shape}")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "DenseTensor":
        # trusted internal constructor: arr is already a fresh complex array
        obj = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.complex128)
        if arr.ndim < 2 or any(n < 1 for n in arr.shape):
            raise ShapeError(f"invalid tensor shape {arr.shape}")
        arr.flags.writeable = False
        obj._data = arr
        return obj

    @classmethod
    def from_flat(cls, shape: Sequence[int], flat) -> "DenseTensor":
        """Build from data linearized first-index-fastest."""
        shape = tuple(int(n) for n in shape)
        flat = np.asarray(flat, dtype=np.complex128).ravel()
        if flat.size != prod(shape):
            raise ShapeError(
                f"data length {flat.size} does not match shape {shape} "
                f"(expected {prod(shape)})"
            )
        return cls(flat.reshape(shape, order="F"))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def trailing_shape(self) -> tuple[int, ...]:
        return self._data.shape[2:]

    @property
    def n_slices(self) -> int:
        return prod(self._data.shape[2:])

    def flat(self) -> np.ndarray:
        """Entries in first-index-fastest order."""
        return self._data.ravel(order="F")

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self._data.imag) <= tol))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def __getitem__(self, idx):
        out = self._data[idx]
        if isinstance(out, np.ndarray):
            return out.copy()
        return complex(out)

    def __len__(self) -> int:
        return self._data.shape[0]

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return DenseTensor._wrap(-self._data)

    def __mul__(self, c):
        if isinstance(c, DenseTensor):
            return NotImplemented
        return scale(self, c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return scale(self, 1.0 / c)

    def __repr__(self) -> str:
        return f"DenseTensor(shape={self.shape})"


def as_tensor(x) -> DenseTensor:
    """Coerce an array-like (or tensor) to ``DenseTensor`` without copying tensors."""
    if isinstance(x, DenseTensor):
        return x
    return DenseTensor(x)


def zeros(shape: Sequence[int]) -> DenseTensor:
    return DenseTensor._wrap(np.zeros(tuple(shape), dtype=np.complex128))


def is_tube(A) -> bool:
    A = as_tensor(A)
    return A.shape[0] == 1 and A.shape[1] == 1


@dataclass(frozen=True)
class SliceIndexMap:
    """Bijection between flat slice indices and trailing multi-indices (0-based)."""

    trailing_shape: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "trailing_shape", tuple(int(n) for n in self.trailing_shape))
        if any(n < 1 for n in self.trailing_shape):
            raise ShapeError(f"trailing dims must be >= 1, got {self.trailing_shape}")

    @property
    def total(self) -> int:
        return prod(self.trailing_shape)

    def to_multi(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.total:
            raise IndexError(f"slice index {i} out of range [0, {self.total})")
        if not self.trailing_shape:
            return ()
        return tuple(int(k) for k in np.unravel_index(i, self.trailing_shape, order="F"))

    def to_flat(self, multi: Iterable[int]) -> int:
        multi = tuple(int(k) for k in multi)
        if len(multi) != len(self.trailing_shape):
            raise ShapeError(f"expected {len(self.trailing_shape)} trailing indices, got {len(multi)}")
        if not multi:
            return 0
        return int(np.ravel_multi_index(multi, self.trailing_shape, order="F"))

    def describe(self, i: int) -> str:
        one_based = tuple(k + 1 for k in self.to_multi(i))
        return f"slice {i} (trailing index {one_based}, 1-based)"


def slices(A) -> np.ndarray:
    """All matrix slices stacked as an ``(n_1, n_2, n_3*...*n_p)`` array.

    The returned array is a read-only view when possible.
    """
    A = as_tensor(A)
    n1, n2 = A.shape[:2]
    return A.data.reshape(n1, n2, A.n_slices, order="F")


def from_slices(stack: np.ndarray, trailing_shape: Sequence[int]) -> DenseTensor:
    """Inverse of :func:`slices`."""
    stack = np.asarray(stack)
    trailing_shape = tuple(trailing_shape)
    if stack.ndim != 3 or stack.shape[2] != prod(trailing_shape):
        raise ShapeError(
            f"slice stack of shape {stack.shape} incompatible with trailing shape {trailing_shape}"
        )
    return DenseTensor._wrap(stack.reshape(stack.shape[:2] + trailing_shape, order="F"))


def matrix_slice(A, i: int) -> np.ndarray:
    """Return the ``n_1 x n_2`` matrix slice ``i`` (0-based flat index)."""
    A = as_tensor(A)
    if not 0 <= i < A.n_slices:
        raise IndexError(f"slice index {i} out of range [0, {A.n_slices})")
    return slices(A)[:, :, i].copy()


def set_matrix_slice(A, i: int, M) -> DenseTensor:
    A = as_tensor(A)
    if not 0 <= i < A.n_slices:
        raise IndexError(f"slice index {i} out of range [0, {A.n_slices})")
    M = np.asarray(M, dtype=np.complex128)
    if M.shape != A.shape[:2]:
        raise ShapeError(f"slice must have shape {A.shape[:2]}, got {M.shape}")
    stack = slices(A).copy()
    stack[:, :, i] = M
    return from_slices(stack, A.trailing_shape)


def mode_m_product(A, X, m: int) -> DenseTensor:
    """Mode-``m`` product ``A x_m X`` (``m`` is 1-based).

    ``X`` has shape ``(J, n_m)``; the result replaces ``n_m`` by ``J``.
    """
    A = as_tensor(A)
    X = np.asarray(X, dtype=np.complex128)
    if not 1 <= m <= A.order:
        raise ShapeError(f"mode {m} out of range for order-{A.order} tensor")
    if X.ndim != 2 or X.shape[1] != A.shape[m - 1]:
        raise ShapeError(
            f"mode-{m} product: axis {m} has size {A.shape[m - 1]} "
            f"but matrix has {X.shape[1] if X.ndim == 2 else X.shape} columns"
        )
    out = np.tensordot(X, A.data, axes=(1, m - 1))
    return DenseTensor._wrap(np.moveaxis(out, 0, m - 1))


def _same_shape(A: DenseTensor, B: DenseTensor, op: str) -> None:
    if A.shape != B.shape:
        raise ShapeError(f"{op}: shape mismatch {A.shape} vs {B.shape}")


def add(A, B) -> DenseTensor:
    A, B = as_tensor(A), as_tensor(B)
    _same_shape(A, B, "add")
    return DenseTensor._wrap(A.data + B.data)


def sub(A, B) -> DenseTensor:
    A, B = as_tensor(A), as_tensor(B)
    _same_shape(A, B, "sub")
    return DenseTensor._wrap(A.data - B.data)


def scale(A, c) -> DenseTensor:
    return DenseTensor._wrap(complex(c) * as_tensor(A).data)


def conj(A) -> DenseTensor:
    return DenseTensor._wrap(np.conj(as_tensor(A).data))


def inner(A, B) -> complex:
    """``<A, B> = sum(conj(A) * B)``."""
    A, B = as_tensor(A), as_tensor(B)
    _same_shape(A, B, "inner")
    return complex(np.vdot(A.data, B.data))


def frobenius(A) -> float:
    return float(np.linalg.norm(as_tensor(A).data.ravel()))


def l1_norm(A) -> float:
    return float(np.abs(as_tensor(A).data).sum())


def linf_norm(A) -> float:
    return float(np.abs(as_tensor(A).data).max())
