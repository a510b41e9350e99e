"""Invertible multilinear transforms acting on the trailing axes.

``L(A) = A x_3 T_3 x_4 T_4 ... x_p T_p`` and
``L^{-1}(A) = A x_p T_p^{-1} ... x_3 T_3^{-1}``.

The scaling of each ``T`` is part of the transform's identity: the
unnormalized ``dft`` reproduces the classical t-product, while
``dft-unitary`` defines a different (unitary) product.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from math import prod
from typing import Sequence

import numpy as np

from .core import DenseTensor, ShapeError, as_tensor, mode_m_product

__all__ = [
    "TransformError",
    "TransformMismatchError",
    "TransformL",
    "forward",
    "inverse",
    "dft_matrix",
    "dct2_matrix",
    "make_transform",
    "make_dft",
    "make_dft_unitary",
    "make_dct",
    "make_identity",
    "make_random_unitary",
    "make_random_invertible",
    "parse_transform",
    "BUILTIN_TRANSFORMS",
]

INVERTIBILITY_TOL = 1e-10
UNITARY_TOL = 1e-10
CONDITION_CAP = 1e6
MAX_RESAMPLES = 16


class TransformError(ValueError):
    """A transform could not be constructed."""


class TransformMismatchError(ShapeError):
    """Tensor trailing shape does not match the transform."""


def _max_abs(M: np.ndarray) -> float:
    return float(np.abs(M).max()) if M.size else 0.0


@dataclass(frozen=True, eq=False)
class TransformL:
    """Ordered square matrices ``(T_3, ..., T_p)`` with cached inverses.

    Build with :func:`make_transform` or one of the ``make_*`` constructors,
    which validate invertibility and set the ``unitary`` flag numerically.
    """

    matrices: tuple[np.ndarray, ...]
    inverses: tuple[np.ndarray, ...]
    unitary: bool
    name: str = "custom"
    condition: float = 1.0
    _skip: tuple[bool, ...] = field(default=(), repr=False)

    @property
    def trailing_shape(self) -> tuple[int, ...]:
        return tuple(T.shape[0] for T in self.matrices)

    @property
    def n_slices(self) -> int:
        return prod(self.trailing_shape)

    def check(self, A: DenseTensor) -> None:
        """Raise :class:`TransformMismatchError` unless ``A`` fits this transform."""
        ts = A.trailing_shape
        if len(ts) != len(self.matrices):
            raise TransformMismatchError(
                f"transform {self.name!r} acts on {len(self.matrices)} trailing axes "
                f"{self.trailing_shape}, tensor has trailing shape {ts}"
            )
        for k, (n, T) in enumerate(zip(ts, self.matrices), start=3):
            if n != T.shape[0]:
                raise TransformMismatchError(
                    f"axis {k}: tensor size {n} but transform {self.name!r} matrix is "
                    f"{T.shape[0]}x{T.shape[1]}"
                )

    def forward(self, A) -> DenseTensor:
        A = as_tensor(A)
        self.check(A)
        for k, T in enumerate(self.matrices):
            if not self._skip[k]:
                A = mode_m_product(A, T, k + 3)
        return A

    def inverse(self, A) -> DenseTensor:
        A = as_tensor(A)
        self.check(A)
        for k in reversed(range(len(self.inverses))):
            if not self._skip[k]:
                A = mode_m_product(A, self.inverses[k], k + 3)
        return A

    def __repr__(self) -> str:
        return (
            f"TransformL(name={self.name!r}, trailing_shape={self.trailing_shape}, "
            f"unitary={self.unitary})"
        )


def forward(L: TransformL, A) -> DenseTensor:
    return L.forward(A)


def inverse(L: TransformL, A) -> DenseTensor:
    return L.inverse(A)


def make_transform(
    matrices: Sequence,
    name: str = "custom",
    inv_tol: float = INVERTIBILITY_TOL,
    unitary_tol: float = UNITARY_TOL,
) -> TransformL:
    """Validate square invertible matrices and cache their inverses."""
    mats, invs, skip = [], [], []
    unitary = True
    cond = 1.0
    for k, T in enumerate(matrices, start=3):
        T = np.array(T, dtype=np.complex128, copy=True)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
            raise TransformError(f"axis {k}: transform matrix must be square, got shape {T.shape}")
        n = T.shape[0]
        eye = np.eye(n)
        try:
            Ti = np.linalg.inv(T)
        except np.linalg.LinAlgError as exc:
            raise TransformError(f"axis {k}: matrix is singular") from exc
        resid = max(_max_abs(T @ Ti - eye), _max_abs(Ti @ T - eye))
        if not np.isfinite(resid) or resid > inv_tol * n:
            raise TransformError(
                f"axis {k}: matrix not numerically invertible (|T T^-1 - I| = {resid:.3g})"
            )
        unitary &= _max_abs(T.conj().T @ T - eye) <= unitary_tol
        cond *= float(np.linalg.cond(T))
        T.flags.writeable = False
        Ti.flags.writeable = False
        mats.append(T)
        invs.append(Ti)
        skip.append(bool(np.array_equal(T, eye)))
    return TransformL(tuple(mats), tuple(invs), bool(unitary), name, cond, tuple(skip))


def dft_matrix(n: int, normalized: bool = False) -> np.ndarray:
    """``F[j, k] = exp(-2 pi i j k / n)``, optionally divided by ``sqrt(n)``."""
    jk = np.outer(np.arange(n), np.arange(n)) % n
    F = np.exp(-2j * np.pi * jk / n)
    return F / np.sqrt(n) if normalized else F


def dct2_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix."""
    j = np.arange(n)[:, None]
    k = np.arange(n)[None, :]
    C = np.cos(np.pi * (2 * k + 1) * j / (2 * n)) * np.sqrt(2.0 / n)
    C[0, :] = np.sqrt(1.0 / n)
    return C


def _dims(trailing_shape) -> tuple[int, ...]:
    if isinstance(trailing_shape, (int, np.integer)):
        trailing_shape = (trailing_shape,)
    dims = tuple(int(n) for n in trailing_shape)
    if any(n < 1 for n in dims):
        raise TransformError(f"trailing dims must be >= 1, got {dims}")
    return dims


def make_dft(trailing_shape) -> TransformL:
    return make_transform([dft_matrix(n) for n in _dims(trailing_shape)], "dft")


def make_dft_unitary(trailing_shape) -> TransformL:
    return make_transform([dft_matrix(n, True) for n in _dims(trailing_shape)], "dft-unitary")


def make_dct(trailing_shape) -> TransformL:
    return make_transform([dct2_matrix(n) for n in _dims(trailing_shape)], "dct")


def make_identity(trailing_shape) -> TransformL:
    return make_transform([np.eye(n) for n in _dims(trailing_shape)], "identity")


def _complex_gaussian(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_unitary_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    Q, R = np.linalg.qr(_complex_gaussian(rng, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def make_random_unitary(trailing_shape, seed: int) -> TransformL:
    rng = np.random.default_rng(seed)
    mats = [random_unitary_matrix(n, rng) for n in _dims(trailing_shape)]
    return make_transform(mats, f"random-unitary:{seed}")


def make_random_invertible(
    trailing_shape, seed: int, condition_cap: float = CONDITION_CAP
) -> TransformL:
    rng = np.random.default_rng(seed)
    mats = []
    for k, n in enumerate(_dims(trailing_shape), start=3):
        for _ in range(MAX_RESAMPLES):
            T = _complex_gaussian(rng, n)
            if np.linalg.cond(T) <= condition_cap:
                break
        else:
            raise TransformError(
                f"axis {k}: no matrix with condition <= {condition_cap:g} "
                f"after {MAX_RESAMPLES} attempts"
            )
        mats.append(T)
    return make_transform(mats, f"random:{seed}")


BUILTIN_TRANSFORMS = ("identity", "dft", "dft-unitary", "dct", "random-unitary", "random")


def _load_file_transform(path: str, trailing_shape: tuple[int, ...]) -> TransformL:
    from .ptns import read_ptns_array

    with open(path) as fh:
        sidecar = json.load(fh)
    paths = sidecar["matrices"] if isinstance(sidecar, dict) else sidecar
    base = os.path.dirname(os.path.abspath(path))
    mats = [read_ptns_array(os.path.join(base, p)) for p in paths]
    L = make_transform(mats, f"file:{path}")
    if L.trailing_shape != trailing_shape:
        raise TransformMismatchError(
            f"{path}: transform matrices have sizes {L.trailing_shape}, "
            f"tensor trailing shape is {trailing_shape}"
        )
    return L


def parse_transform(spec: str, trailing_shape) -> TransformL:
    """Build a transform from a CLI spec string.

    ``identity | dft | dft-unitary | dct | random-unitary:<seed> | random:<seed> | file:<path>``.
    ``file:`` points at a JSON sidecar ``{"matrices": ["T3.ptns", ...]}``; paths
    inside are relative to the sidecar.
    """
    dims = _dims(trailing_shape)
    kind, _, arg = spec.partition(":")
    if kind == "identity":
        return make_identity(dims)
    if kind == "dft":
        return make_dft(dims)
    if kind == "dft-unitary":
        return make_dft_unitary(dims)
    if kind == "dct":
        return make_dct(dims)
    if kind in ("random-unitary", "random"):
        try:
            seed = int(arg)
        except ValueError:
            raise TransformError(f"transform {spec!r}: expected integer seed") from None
        if kind == "random":
            return make_random_invertible(dims, seed)
        return make_random_unitary(dims, seed)
    if kind == "file":
        return _load_file_transform(arg, dims)
    raise TransformError(f"unknown transform spec {spec!r}")
