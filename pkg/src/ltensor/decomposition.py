"""t-SVD under ``*_L``, truncation, multi-rank and tubal rank."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DenseTensor, SliceIndexMap, as_tensor, from_slices, slices
from .product import NumericalError
from .transforms import TransformL, random_unitary_matrix

__all__ = [
    "TSVDFactors",
    "MultiRank",
    "SingularSpectrum",
    "default_rank_tol",
    "slice_singular_values",
    "tsvd",
    "reconstruct",
    "truncate",
    "multi_rank",
    "tubal_rank",
    "singular_spectrum",
    "synthesize",
]

RANK_TOL_CAP = 1e-6
ZERO_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class TSVDFactors:
    U: DenseTensor
    S: DenseTensor
    V: DenseTensor
    transform: TransformL


@dataclass(frozen=True)
class MultiRank:
    ranks: tuple[int, ...]

    @property
    def l1(self) -> int:
        return int(sum(self.ranks))

    @property
    def l2(self) -> float:
        return float(np.sqrt(sum(r * r for r in self.ranks)))

    def __iter__(self):
        return iter(self.ranks)


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """Transform-domain singular values.

    ``per_slice[i]`` holds the descending singular values of slice ``i``;
    ``values`` is the global descending sequence and ``sources[k]`` the slice
    that ``values[k]`` came from.
    """

    per_slice: np.ndarray
    values: np.ndarray
    sources: np.ndarray

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def sigma_max(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0


def default_rank_tol(shape: Sequence[int], L: TransformL) -> float:
    """``max(n1, n2) * eps * cond(L) * (n_3 + ... + n_p)``, capped at 1e-6.

    ``cond(L)`` is the product of the 2-norm condition numbers of the
    transform matrices (1 for unitary transforms). The extra factors cover
    the roundoff of mapping through ``L^{-1}`` and back.
    """
    n1, n2 = shape[:2]
    spread = max(1, sum(shape[2:]))
    tol = max(n1, n2) * np.finfo(float).eps * L.condition * spread
    return float(min(tol, RANK_TOL_CAP))


def _svd_stack(stack: np.ndarray, index: SliceIndexMap, compute_uv: bool):
    # stack: (S, n1, n2)
    try:
        return np.linalg.svd(stack, full_matrices=True, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        pass
    for i in range(stack.shape[0]):
        try:
            np.linalg.svd(stack[i], compute_uv=False)
        except np.linalg.LinAlgError:
            raise NumericalError(f"SVD did not converge on {index.describe(i)}") from None
    raise NumericalError("SVD did not converge")


def slice_singular_values(A, L: TransformL) -> np.ndarray:
    """Descending singular values of every slice of ``L(A)``, shape ``(S, min(n1, n2))``."""
    A = as_tensor(A)
    hat = np.moveaxis(slices(L.forward(A)), 2, 0)
    return _svd_stack(hat, SliceIndexMap(A.trailing_shape), compute_uv=False)


def tsvd(A, L: TransformL) -> TSVDFactors:
    """``A = U *_L S *_L V^H`` from slicewise SVDs of ``L(A)``."""
    A = as_tensor(A)
    n1, n2 = A.shape[:2]
    ts = A.trailing_shape
    hat = np.moveaxis(slices(L.forward(A)), 2, 0)
    u, s, vh = _svd_stack(hat, SliceIndexMap(ts), compute_uv=True)
    k = s.shape[1]
    s_hat = np.zeros((hat.shape[0], n1, n2), dtype=np.complex128)
    s_hat[:, np.arange(k), np.arange(k)] = s
    v = np.conj(np.swapaxes(vh, 1, 2))

    def back(stack):
        return L.inverse(from_slices(np.moveaxis(stack, 0, 2), ts))

    return TSVDFactors(back(u), back(s_hat), back(v), L)


def _factor_hats(F: TSVDFactors):
    L = F.transform
    u = np.moveaxis(slices(L.forward(F.U)), 2, 0)
    s = np.moveaxis(slices(L.forward(F.S)), 2, 0)
    v = np.moveaxis(slices(L.forward(F.V)), 2, 0)
    return u, s, v


def reconstruct(F: TSVDFactors) -> DenseTensor:
    """``U *_L S *_L V^H``."""
    return truncate(F, None)


def _rank_vector(r, n_slices: int, k: int) -> np.ndarray:
    if r is None or (isinstance(r, str) and r == "full"):
        return np.full(n_slices, k, dtype=int)
    arr = np.asarray(r)
    if arr.ndim == 0:
        arr = np.full(n_slices, int(arr), dtype=int)
    arr = arr.astype(int).ravel()
    if arr.size != n_slices:
        raise ValueError(f"rank vector has {arr.size} entries, expected {n_slices}")
    if np.any(arr < 0) or np.any(arr > k):
        raise ValueError(f"ranks must lie in [0, {k}], got {arr.tolist()}")
    return arr


def truncate(F: TSVDFactors, r=None) -> DenseTensor:
    """Keep the leading ``r_i`` transform-domain singular triplets of slice ``i``.

    ``r`` is a scalar, a per-slice vector, or ``None``/``"full"`` for no
    truncation.
    """
    u, s, v = _factor_hats(F)
    n_slices, n1, n2 = s.shape
    k = min(n1, n2)
    ranks = _rank_vector(r, n_slices, k)
    keep = np.arange(k)[None, :] < ranks[:, None]
    diag = np.diagonal(s, axis1=1, axis2=2) * keep
    out = np.einsum("sij,sj,skj->sik", u[:, :, :k], diag, np.conj(v[:, :, :k]))
    return F.transform.inverse(from_slices(np.moveaxis(out, 0, 2), F.U.trailing_shape))


def _threshold(sv: np.ndarray, rel_tol: float) -> float:
    sigma1 = float(sv.max()) if sv.size else 0.0
    return max(rel_tol * sigma1, ZERO_FLOOR)


def multi_rank(A, L: TransformL, rel_tol: float | None = None) -> MultiRank:
    """Numeric ranks of the slices of ``L(A)``.

    A singular value counts when it exceeds ``rel_tol * sigma_(1)``, the
    largest singular value over all slices (i.e. the numeric rank rule of the
    block-diagonal matrix ``bdiag(L(A))``).
    """
    A = as_tensor(A)
    if rel_tol is None:
        rel_tol = default_rank_tol(A.shape, L)
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    sv = slice_singular_values(A, L)
    thr = _threshold(sv, rel_tol)
    return MultiRank(tuple(int(c) for c in (sv > thr).sum(axis=1)))


def tubal_rank(A, L: TransformL, rel_tol: float | None = None) -> int:
    """Number of numerically nonzero diagonal tubes of ``S``."""
    ranks = multi_rank(A, L, rel_tol).ranks
    return max(ranks) if ranks else 0


def singular_spectrum(A, L: TransformL) -> SingularSpectrum:
    sv = slice_singular_values(A, L)
    flat = sv.ravel()
    sources = np.repeat(np.arange(sv.shape[0]), sv.shape[1])
    order = np.argsort(-flat, kind="stable")
    return SingularSpectrum(sv, flat[order], sources[order])


def synthesize(
    shape: Sequence[int],
    ranks,
    L: TransformL,
    rng: np.random.Generator,
    sv_range: tuple[float, float] = (1.0, 2.0),
    real_spectrum: np.ndarray | None = None,
) -> DenseTensor:
    """Random tensor with prescribed multi-rank under ``L``.

    Each transform-domain slice is ``U_i diag(s_i) V_i^H`` with Haar unitary
    ``U_i, V_i`` and ``r_i`` singular values drawn uniformly from
    ``sv_range``; ``real_spectrum`` (shape ``(S, min(n1, n2))``) overrides the
    singular values, in which case ``ranks`` is ignored.
    """
    shape = tuple(int(n) for n in shape)
    n1, n2 = shape[:2]
    ts = shape[2:]
    if L.trailing_shape != ts:
        raise ValueError(f"transform trailing shape {L.trailing_shape} does not match {ts}")
    n_slices = L.n_slices
    k = min(n1, n2)
    if real_spectrum is None:
        r = _rank_vector(ranks, n_slices, k)
        lo, hi = sv_range
        spectrum = np.zeros((n_slices, k))
        for i in range(n_slices):
            spectrum[i, : r[i]] = np.sort(rng.uniform(lo, hi, r[i]))[::-1]
    else:
        spectrum = np.asarray(real_spectrum, dtype=float).reshape(n_slices, k)
    hat = np.empty((n_slices, n1, n2), dtype=np.complex128)
    for i in range(n_slices):
        U = random_unitary_matrix(n1, rng)[:, :k]
        V = random_unitary_matrix(n2, rng)[:, :k]
        hat[i] = (U * spectrum[i]) @ V.conj().T
    return L.inverse(from_slices(np.moveaxis(hat, 0, 2), ts))
