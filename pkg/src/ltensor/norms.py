"""Transform-domain nuclear and spectral norms, multi-rank norms."""
from __future__ import annotations

from dataclasses import dataclass

from .decomposition import multi_rank, singular_spectrum
from .transforms import TransformL

__all__ = [
    "NormReport",
    "tensor_norms",
    "nuclear_norm_L",
    "spectral_norm_L",
    "multirank_l1",
    "multirank_l2",
]


@dataclass(frozen=True)
class NormReport:
    nuclear: float
    spectral: float
    # the nuclear norm is the convex envelope of the multi-rank l1 norm only
    # for unitary transforms
    unitary_transform: bool


def tensor_norms(A, L: TransformL) -> NormReport:
    spec = singular_spectrum(A, L)
    return NormReport(float(spec.values.sum()), spec.sigma_max, L.unitary)


def nuclear_norm_L(A, L: TransformL) -> float:
    """Sum of the matrix nuclear norms of the slices of ``L(A)``."""
    return tensor_norms(A, L).nuclear


def spectral_norm_L(A, L: TransformL) -> float:
    """Spectral norm of ``bdiag(L(A))``, i.e. the largest slice singular value."""
    return tensor_norms(A, L).spectral


def multirank_l1(A, L: TransformL, rel_tol: float | None = None) -> int:
    return multi_rank(A, L, rel_tol).l1


def multirank_l2(A, L: TransformL, rel_tol: float | None = None) -> float:
    return multi_rank(A, L, rel_tol).l2
