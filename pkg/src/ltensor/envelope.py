"""Conjugate and biconjugate of the multi-rank l1 norm on the spectral unit ball.

For a unitary transform ``L`` write ``Y(X) = ||rank_m(X)||_1`` (restricted to
``||X|| <= 1``) and let ``sigma_(1) >= sigma_(2) >= ...`` be the singular
values of all slices of ``L(Y)``, sorted together. Then::

    Y#(Y)  = max_r (sigma_(1) + ... + sigma_(r) - r) = sum_{sigma_(i) > 1} (sigma_(i) - 1)
    Y##(Z) = ||Z||_{*,L}  if ||Z|| <= 1, unbounded otherwise

so the nuclear norm is the convex envelope of the multi-rank l1 norm on the
ball. This module evaluates both closed forms and checks the conjugate
numerically against sampled feasible points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_tensor, from_slices, inner, slices
from .decomposition import SingularSpectrum, singular_spectrum, synthesize
from .norms import multirank_l1, nuclear_norm_L, spectral_norm_L
from .transforms import TransformError, TransformL, random_unitary_matrix

__all__ = [
    "NonUnitaryTransformError",
    "UNBOUNDED",
    "ConjugateReport",
    "LowerBoundReport",
    "upsilon",
    "conjugate_max_over_r",
    "conjugate_thresholded",
    "upsilon_conjugate",
    "upsilon_biconjugate",
    "conjugate_lower_bound_check",
    "random_in_ball",
    "BALL_TOL",
]

# slack on ||Z|| <= 1 so a tensor scaled to unit spectral norm stays inside
BALL_TOL = 1e-10


class NonUnitaryTransformError(TransformError):
    pass


class _Unbounded:
    """Marker for a supremum of +infinity. Deliberately not a number."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __str__(self) -> str:
        return "inf"

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


@dataclass(frozen=True, eq=False)
class ConjugateReport:
    value: float
    active_count: int
    spectrum: SingularSpectrum
    unitary_transform: bool


@dataclass(frozen=True)
class LowerBoundReport:
    max_violation: float
    conjugate: float
    maximizer_value: float
    maximizer_gap: float
    samples: int
    mean_objective: float


def _require_unitary(L: TransformL) -> None:
    if not L.unitary:
        raise NonUnitaryTransformError(
            f"transform {L.name!r} is not unitary; the envelope result needs a unitary transform"
        )


def upsilon(X, L: TransformL, rel_tol: float | None = None) -> int:
    """``||rank_m(X)||_1``."""
    return multirank_l1(X, L, rel_tol)


def conjugate_max_over_r(values) -> float:
    """``max(0, s_1 - 1, s_1 + s_2 - 2, ...)`` over the descending sequence ``values``."""
    s = np.sort(np.asarray(values, dtype=float).ravel())[::-1]
    partial = np.cumsum(s) - np.arange(1, s.size + 1)
    return float(max(0.0, partial.max())) if s.size else 0.0


def conjugate_thresholded(values) -> tuple[float, int]:
    """``sum(s - 1 for s > 1)`` and the number of such terms."""
    s = np.asarray(values, dtype=float).ravel()
    active = s[s > 1.0]
    return float((active - 1.0).sum()), int(active.size)


def upsilon_conjugate(Y, L: TransformL) -> ConjugateReport:
    _require_unitary(L)
    spec = singular_spectrum(Y, L)
    value, m = conjugate_thresholded(spec.values)
    return ConjugateReport(value, m, spec, L.unitary)


def upsilon_biconjugate(Z, L: TransformL, ball_tol: float = BALL_TOL):
    """Nuclear norm inside the spectral unit ball, :data:`UNBOUNDED` outside."""
    _require_unitary(L)
    if spectral_norm_L(Z, L) > 1.0 + ball_tol:
        return UNBOUNDED
    return nuclear_norm_L(Z, L)


def _substream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _sample_singular_values(rng: np.random.Generator, ranks: np.ndarray, k: int) -> np.ndarray:
    sv = np.zeros((ranks.size, k))
    for i, r in enumerate(ranks):
        vals = rng.uniform(0.0, 1.0, r)
        vals[rng.random(r) < 0.3] = 1.0
        # keep every kept value well away from the rank threshold
        vals = np.maximum(vals, 1e-3)
        sv[i, :r] = np.sort(vals)[::-1]
    return sv


def conjugate_lower_bound_check(Y, L: TransformL, samples: int = 1000, seed: int = 0) -> LowerBoundReport:
    """Sample feasible ``X`` and check ``Re<Y, X> - Y(X) <= Y#(Y)``.

    Half of the samples share ``Y``'s transform-domain singular vectors, the
    rest use independent Haar unitary factors; per-slice ranks are random, so
    ``Y(X)`` is known by construction. The structured maximizer (``Y``'s
    singular vectors with singular value 1 wherever ``sigma_(i)(L(Y)) > 1``)
    is evaluated separately and must attain the conjugate.
    """
    _require_unitary(L)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    Y = as_tensor(Y)
    n1, n2 = Y.shape[:2]
    k = min(n1, n2)
    ts = Y.trailing_shape
    conj_value = upsilon_conjugate(Y, L).value

    hat = np.moveaxis(slices(L.forward(Y)), 2, 0)
    u_y, s_y, vh_y = np.linalg.svd(hat, full_matrices=True)
    u_y, vh_y = u_y[:, :, :k], vh_y[:, :k, :]

    def assemble(u, sv, vh):
        x_hat = np.einsum("sij,sj,sjk->sik", u, sv, vh)
        return L.inverse(from_slices(np.moveaxis(x_hat, 0, 2), ts))

    objectives = np.empty(samples)
    for idx in range(samples):
        rng = _substream(seed, idx)
        ranks = rng.integers(0, k + 1, size=L.n_slices)
        sv = _sample_singular_values(rng, ranks, k)
        if idx % 2 == 0:
            u, vh = u_y, vh_y
        else:
            u = np.stack([random_unitary_matrix(n1, rng)[:, :k] for _ in range(L.n_slices)])
            vh = np.stack([random_unitary_matrix(n2, rng)[:, :k].conj().T for _ in range(L.n_slices)])
        X = assemble(u, sv, vh)
        objectives[idx] = inner(Y, X).real - int(ranks.sum()) - conj_value

    active = (s_y > 1.0).astype(float)
    X_star = assemble(u_y, active, vh_y)
    star_value = inner(Y, X_star).real - int(active.sum())
    return LowerBoundReport(
        max_violation=float(objectives.max()),
        conjugate=conj_value,
        maximizer_value=float(star_value),
        maximizer_gap=float(abs(star_value - conj_value)),
        samples=samples,
        mean_objective=float(objectives.mean()),
    )


def random_in_ball(shape, L: TransformL, rng: np.random.Generator, radius: float = 1.0):
    """Random tensor with full multi-rank rescaled to spectral norm ``radius``.

    The result never exceeds ``radius``: rounding that lands a few ulps above
    it is undone by shrinking the scale factor.
    """
    k = min(shape[0], shape[1])
    spectrum = rng.uniform(0.0, 1.0, (L.n_slices, k))
    spectrum = -np.sort(-spectrum, axis=1)
    Z = synthesize(shape, None, L, rng, real_spectrum=spectrum)
    factor = radius / spectral_norm_L(Z, L)
    out = Z * factor
    while spectral_norm_L(out, L) > radius:
        factor = np.nextafter(factor, 0.0)
        out = Z * factor
    return out
