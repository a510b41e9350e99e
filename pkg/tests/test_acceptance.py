"""Acceptance criteria, each checked at its stated tolerance and count.

Every test records a one-line verdict into ``ACCEPTANCE``; the terminal
summary prints them as ``[PASS|FAIL] criterion k: ...``.
"""
import json
import subprocess
import sys
import time
from functools import reduce

import numpy as np
import pytest

from ltensor import oracle
from ltensor.core import from_slices, slices
from ltensor.decomposition import multi_rank, reconstruct, singular_spectrum, synthesize, truncate, tsvd
from ltensor.determinant import det_fast, det_recursive, identity_det_tube
from ltensor.envelope import (
    UNBOUNDED,
    conjugate_lower_bound_check,
    random_in_ball,
    upsilon_biconjugate,
    upsilon_conjugate,
)
from ltensor.norms import nuclear_norm_L, spectral_norm_L
from ltensor.product import (
    conj_transpose,
    identity_tensor,
    t_product_L,
    tube_add,
    tube_identity,
    tube_mul,
)
from ltensor.ptns import read_ptns
from ltensor.transforms import make_dct, make_dft, make_dft_unitary, random_unitary_matrix

from _helpers import ACCEPTANCE, TRANSFORM_NAMES, UNITARY_NAMES, make, rand, rel


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, f"criterion {key}: {detail}"


def stream(*key):
    return np.random.default_rng(list(key))


def trailing(rng, order, max_dim):
    return tuple(int(n) for n in rng.integers(1, max_dim + 1, order - 2))


# 1 ---------------------------------------------------------------------------

def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(50):
        rng = stream(1, i)
        n1, l, n3 = (int(rng.integers(1, m + 1)) for m in (4, 3, 5))
        n2 = int(rng.integers(1, 5))
        real = i % 2 == 0
        A, B = rand(rng, (n1, l, n3), real), rand(rng, (l, n2, n3), real)
        got = t_product_L(A, B, make_dft((n3,))).data
        worst = max(worst, rel(got, oracle.t_product_classic(A, B)))
    elapsed = time.perf_counter() - t0
    record("1", worst <= 1e-10 and elapsed < 5,
           f"50 pairs, worst rel err {worst:.2e} (tol 1e-10), {elapsed:.2f}s (< 5s)")


# 2 ---------------------------------------------------------------------------

def test_criterion_2_block_diagonalization():
    t0 = time.perf_counter()
    off = blk = 0.0
    count = 0
    for n1 in range(1, 5):
        for n2 in range(1, 5):
            for n3 in range(1, 5):
                A = rand(stream(2, n1, n2, n3), (n1, n2, n3), real=(n1 + n2) % 2 == 0)
                r = oracle.verify_block_diagonalization(A, "third_order")
                off, blk, count = max(off, r.off_block), max(blk, r.block_error), count + 1
    for shape in np.ndindex(3, 3, 3, 3):
        shape = tuple(n + 1 for n in shape)
        A = rand(stream(2, *shape), shape, real=sum(shape) % 2 == 0)
        r = oracle.verify_block_diagonalization(A, "p_order")
        off, blk, count = max(off, r.off_block), max(blk, r.block_error), count + 1
    elapsed = time.perf_counter() - t0
    record("2", off <= 1e-10 and blk <= 1e-9 and elapsed < 10,
           f"{count} shapes (all p=3 dims<=4, all p=4 dims<=3), off-block {off:.2e} (tol 1e-10), "
           f"block err {blk:.2e} (tol 1e-9), {elapsed:.2f}s (< 10s)")


# 3 ---------------------------------------------------------------------------

def _law_errors(name, i):
    rng = stream(3, TRANSFORM_NAMES.index(name), i)
    p = (3, 4, 5)[i % 3]
    ts = trailing(rng, p, 4)
    L = make(name, ts, seed=i)
    n1, n2, n3, n4 = (int(n) for n in rng.integers(1, 5, 4))
    real = i % 2 == 0
    A, B, C = rand(rng, (n1, n2) + ts, real), rand(rng, (n2, n3) + ts, real), rand(rng, (n3, n4) + ts, real)
    P = lambda X, Y: t_product_L(X, Y, L)
    H = lambda X: conj_transpose(X, L)
    assoc = rel(P(P(A, B), C).data, P(A, P(B, C)).data)
    ident = max(rel(P(A, identity_tensor(n2, ts, L)).data, A),
                rel(P(identity_tensor(n1, ts, L), A).data, A))
    transp = rel(H(P(A, B)).data, P(H(B), H(A)).data)
    a, b, c = (rand(rng, (1, 1) + ts, real) for _ in range(3))
    M = lambda x, y: tube_mul(x, y, L)
    e = tube_identity(L)
    ring = max(
        rel(M(a, b).data, M(b, a).data),
        rel(M(M(a, b), c).data, M(a, M(b, c)).data),
        rel(M(a, tube_add(b, c)).data, tube_add(M(a, b), M(a, c)).data),
        rel(M(a, e).data, a),
        rel(tube_add(a, b).data, tube_add(b, a).data),
    )
    return assoc, ident, transp, ring


@pytest.mark.parametrize("name", TRANSFORM_NAMES)
def test_criterion_3_algebra_laws(name):
    worst = np.zeros(4)
    for i in range(100):
        worst = np.maximum(worst, _law_errors(name, i))
    labels = ("assoc", "identity", "transpose", "tube ring")
    detail = ", ".join(f"{k} {v:.1e}" for k, v in zip(labels, worst))
    record(f"3.{name}", (worst <= 1e-10).all(), f"{name}: 100 instances p in 3..5 dims<=4, {detail} (tol 1e-10)")


# 4 ---------------------------------------------------------------------------

def _tsvd_errors(L, A):
    F = tsvd(A, L)
    recon = rel(reconstruct(F).data, A)
    unit = 0.0
    for Q in (F.U, F.V):
        I = identity_tensor(Q.shape[0], Q.trailing_shape, L).data
        Qh = conj_transpose(Q, L)
        unit = max(unit, np.abs(t_product_L(Qh, Q, L).data - I).max(),
                   np.abs(t_product_L(Q, Qh, L).data - I).max())
    s = np.moveaxis(slices(L.forward(F.S)), 2, 0)
    k = min(A.shape[:2])
    diag = np.diagonal(s, axis1=1, axis2=2)
    off = np.abs(s - _diag_embed(diag, A.shape[:2])).max()
    neg = max(np.abs(diag.imag).max(), (-diag.real).max(), 0.0)
    rise = np.diff(diag.real, axis=1).max() if k > 1 else 0.0
    return recon, unit, off, neg, max(rise, 0.0)


def _diag_embed(diag, shape):
    out = np.zeros((diag.shape[0],) + tuple(shape), dtype=diag.dtype)
    k = diag.shape[1]
    out[:, np.arange(k), np.arange(k)] = diag
    return out


def test_criterion_4_tsvd():
    t0 = time.perf_counter()
    caps = (5, 4, 3, 2, 2)
    worst = {}
    for name in TRANSFORM_NAMES:
        w = np.zeros(5)
        for i in range(50):
            rng = stream(4, TRANSFORM_NAMES.index(name), i)
            p = (3, 4, 5)[i % 3]
            shape = caps[:p] if i < 3 else tuple(int(rng.integers(1, m + 1)) for m in caps[:p])
            A = rand(rng, shape, real=i % 2 == 0)
            w = np.maximum(w, _tsvd_errors(make(name, shape[2:], seed=i), A))
        worst[name] = w
    elapsed = time.perf_counter() - t0
    w = np.max(list(worst.values()), axis=0)
    ok = w[0] <= 1e-9 and w[1] <= 1e-9 and w[2] <= 1e-12 and w[3] <= 1e-12 and w[4] <= 1e-12 and elapsed < 30
    record("4", ok, f"50 per transform up to (5,4,3,2,2): recon {w[0]:.1e} (1e-9), unitary {w[1]:.1e} (1e-9), "
                    f"off-diag {w[2]:.1e}, neg {w[3]:.1e}, ascent {w[4]:.1e} (1e-12), {elapsed:.2f}s (< 30s)")


# 5 ---------------------------------------------------------------------------

def test_criterion_5_determinant():
    rr = mult = ident = 0.0
    for t, name in enumerate(TRANSFORM_NAMES):
        for i in range(20):
            rng = stream(5, 0, t, i)
            n = (2, 3, 4)[i % 3]
            ts = trailing(rng, (3, 4)[i % 2], 3)
            L = make(name, ts, seed=i)
            A = rand(rng, (n, n) + ts, real=i % 2 == 0)
            rr = max(rr, rel(det_recursive(A, L).data, det_fast(A, L).data))
        for i in range(50):
            rng = stream(5, 1, t, i)
            n = int(rng.integers(1, 5))
            ts = trailing(rng, (3, 4)[i % 2], 3)
            L = make(name, ts, seed=i)
            A, B = rand(rng, (n, n) + ts), rand(rng, (n, n) + ts)
            lhs = det_fast(t_product_L(A, B, L), L)
            rhs = tube_mul(det_fast(A, L), det_fast(B, L), L)
            mult = max(mult, rel(lhs.data, rhs.data))
        for n in range(2, 7):
            for ts in ((4,), (2, 3), (2, 2, 2)):
                L = make(name, ts, seed=n)
                I = identity_tensor(n, ts, L)
                expected = identity_det_tube(L).data
                ones = L.inverse(from_slices(np.ones((1, 1, L.n_slices)), ts)).data
                assert np.array_equal(expected, ones)
                ident = max(ident, rel(det_fast(I, L).data, expected), rel(det_recursive(I, L).data, expected))
    record("5", rr <= 1e-9 and mult <= 1e-9 and ident <= 1e-11,
           f"recursive vs fast {rr:.1e} (20/transform, n in 2..4), multiplicativity {mult:.1e} "
           f"(50 pairs/transform), det(I) {ident:.1e} (n in 2..6, tol 1e-11)")


# 6 ---------------------------------------------------------------------------

def _independent_slice_svals(A, L):
    """Transform-domain singular values via one Kronecker matrix and per-slice SVDs."""
    A = np.asarray(A)
    n1, n2 = A.shape[:2]
    K = reduce(np.kron, reversed(L.matrices))
    hat = A.reshape(n1 * n2, -1, order="F") @ K.T
    return [np.linalg.svd(hat[:, s].reshape(n1, n2, order="F"), compute_uv=False) for s in range(hat.shape[1])]


def _random_unitary_tensor(n, ts, L, rng):
    S = int(np.prod(ts))
    hat = np.stack([random_unitary_matrix(n, rng) for _ in range(S)], axis=2)
    return L.inverse(from_slices(hat, ts))


def test_criterion_6_norm_identities():
    exact = True
    cross = 0.0
    for t, name in enumerate(TRANSFORM_NAMES):
        for i in range(20):
            rng = stream(6, 0, t, i)
            ts = trailing(rng, (3, 4, 5)[i % 3], 3)
            L = make(name, ts, seed=i)
            A = rand(rng, tuple(int(n) for n in rng.integers(1, 5, 2)) + ts, real=i % 2 == 0)
            spec = singular_spectrum(A, L)
            exact &= nuclear_norm_L(A, L) == float(spec.values.sum())
            exact &= spectral_norm_L(A, L) == spec.values[0]
            ref = np.concatenate(_independent_slice_svals(A, L))
            scale = max(ref.max(), 1e-300)
            cross = max(cross, abs(nuclear_norm_L(A, L) - ref.sum()) / ref.sum(),
                        abs(spectral_norm_L(A, L) - ref.max()) / scale)
    inv = 0.0
    for maker in (make_dft_unitary, make_dct):
        for i in range(50):
            rng = stream(6, 1, i)
            ts = trailing(rng, (3, 4)[i % 2], 4)
            L = maker(ts)
            n1, n2 = (int(n) for n in rng.integers(1, 5, 2))
            A = rand(rng, (n1, n2) + ts, real=i % 2 == 0)
            Q1, Q2 = _random_unitary_tensor(n1, ts, L, rng), _random_unitary_tensor(n2, ts, L, rng)
            B = t_product_L(t_product_L(Q1, A, L), Q2, L)
            ref = nuclear_norm_L(A, L)
            inv = max(inv, abs(nuclear_norm_L(B, L) - ref) / ref)
    record("6", exact and cross <= 1e-10 and inv <= 1e-9,
           f"spectrum identities exact: {exact}; vs independent SVDs {cross:.1e} (1e-10); "
           f"unitary invariance {inv:.1e} on 50 triples each for dft-unitary and dct (1e-9)")


# 7 ---------------------------------------------------------------------------

def _unitary(i, ts):
    return make(UNITARY_NAMES[i % len(UNITARY_NAMES)], ts, seed=i)


def test_criterion_7_envelope():
    t0 = time.perf_counter()
    inside_nonzero = 0
    for i in range(100):
        rng = stream(7, 0, i)
        ts = trailing(rng, (3, 4)[i % 2], 3)
        L = _unitary(i, ts)
        shape = tuple(int(n) for n in rng.integers(1, 5, 2)) + ts
        radius = 1.0 if i % 10 == 0 else float(rng.uniform(0.01, 1.0))
        Y = random_in_ball(shape, L, rng, radius)
        assert spectral_norm_L(Y, L) <= 1.0
        inside_nonzero += upsilon_conjugate(Y, L).value != 0.0

    gap = 0.0
    mixed = 0
    for i in range(50):
        rng = stream(7, 1, i)
        ts = trailing(rng, (3, 4)[i % 2], 3)
        L = _unitary(i, ts)
        shape = (int(rng.integers(2, 5)), int(rng.integers(2, 5))) + ts
        k = min(shape[:2])
        spectrum = -np.sort(-rng.uniform(0.0, 2.5, (L.n_slices, k)), axis=1)
        spectrum.flat[0], spectrum.flat[-1] = 2.0, 0.5
        Y = synthesize(shape, None, L, rng, real_spectrum=spectrum)
        rep = conjugate_lower_bound_check(Y, L, samples=1, seed=i)
        mixed += rep.conjugate > 0
        gap = max(gap, rep.maximizer_gap)

    violation = -np.inf
    mc_cases = []
    for i, shape in enumerate(((3, 3, 2), (2, 4, 3), (3, 2, 2, 2), (4, 4, 4))):
        rng = stream(7, 2, i)
        L = _unitary(i, shape[2:])
        k = min(shape[:2])
        spectrum = -np.sort(-rng.uniform(0.0, 2.5, (L.n_slices, k)), axis=1)
        Y = synthesize(shape, None, L, rng, real_spectrum=spectrum)
        rep = conjugate_lower_bound_check(Y, L, samples=1000, seed=i)
        violation = max(violation, rep.max_violation)
        mc_cases.append(rep.samples)

    bic = 0.0
    for i in range(100):
        rng = stream(7, 3, i)
        ts = trailing(rng, (3, 4)[i % 2], 3)
        L = _unitary(i, ts)
        shape = tuple(int(n) for n in rng.integers(1, 5, 2)) + ts
        radius = 1.0 if i % 4 == 0 else float(rng.uniform(0.01, 1.0))
        Z = random_in_ball(shape, L, rng, radius)
        value = upsilon_biconjugate(Z, L)
        if value is UNBOUNDED:
            bic = np.inf
            continue
        bic = max(bic, abs(value - nuclear_norm_L(Z, L)))
    elapsed = time.perf_counter() - t0
    ok = inside_nonzero == 0 and mixed == 50 and gap <= 1e-8 and violation <= 1e-8 and bic <= 1e-10 and elapsed < 60
    record("7", ok,
           f"(a) nonzero conjugates inside ball {inside_nonzero}/100; (b) maximizer gap {gap:.1e} on "
           f"{mixed}/50 mixed spectra (1e-8); (c) max violation {violation:.2e} over "
           f"{len(mc_cases)}x1000 samples (<= 1e-8); (d) biconjugate vs nuclear {bic:.1e} on 100 Z (1e-10); "
           f"{elapsed:.2f}s (< 60s)")


# 8 ---------------------------------------------------------------------------

def test_criterion_8_rank_pipeline():
    prescribed_fail = trunc_fail = total = 0
    for t, name in enumerate(TRANSFORM_NAMES):
        for i in range(50):
            rng = stream(8, 0, t, i)
            p = (3, 4, 5)[i % 3]
            shape = tuple(int(n) for n in rng.integers(1, 6, 2)) + trailing(rng, p, 5 if p < 5 else 3)
            L = make(name, shape[2:], seed=i)
            k = min(shape[:2])
            ranks = tuple(int(r) for r in rng.integers(0, k + 1, L.n_slices))
            if i % 5 == 0:
                ranks = (k,) * L.n_slices
            A = synthesize(shape, ranks, L, rng)
            prescribed_fail += multi_rank(A, L).ranks != ranks
            total += 1
    for i in range(50):
        rng = stream(8, 1, i)
        name = TRANSFORM_NAMES[i % len(TRANSFORM_NAMES)]
        p = (3, 4, 5)[i % 3]
        shape = tuple(int(n) for n in rng.integers(1, 6, 2)) + trailing(rng, p, 4 if p < 5 else 3)
        L = make(name, shape[2:], seed=i)
        k = min(shape[:2])
        A = rand(rng, shape, real=i % 2 == 0)
        F = tsvd(A, L)
        r = tuple(int(x) for x in rng.integers(0, k + 1, L.n_slices))
        trunc_fail += multi_rank(truncate(F, r), L).ranks != r
    record("8", prescribed_fail == 0 and trunc_fail == 0,
           f"prescribed multi-rank mismatches {prescribed_fail}/{total} (dims<=5, all transforms); "
           f"truncate-then-rank mismatches {trunc_fail}/50")


# 9 ---------------------------------------------------------------------------

def _cli(*args):
    res = subprocess.run([sys.executable, "-m", "ltensor.cli", *map(str, args)], capture_output=True, text=True)
    return res.returncode, res.stdout, res.stderr


def test_criterion_9_cli(tmp_path):
    A, B, f = tmp_path / "A.ptns", tmp_path / "B.ptns", tmp_path / "f"
    steps = [
        ("gen", "--shape", "4,3,3,2", "--multirank", "2,3,1,0,2,3", "--seed", "9", "-o", A),
        ("tsvd", A, "-o", f, "--json", tmp_path / "s.json"),
        ("truncate", "--factors", f"{f}_U.ptns", f"{f}_S.ptns", f"{f}_V.ptns", "--rank", "full", "-o", B),
    ]
    codes = [_cli(*s)[0] for s in steps]
    roundtrip = rel(read_ptns(B).data, read_ptns(A).data) if not any(codes) else np.inf
    summary = json.loads((tmp_path / "s.json").read_text()) if not any(codes) else {}

    code, out, _ = _cli("verify", "--seed", "9")
    v = json.loads(out) if code == 0 else {}
    verify_ok = (
        code == 0
        and v["classic_vs_L_residual"] <= 1e-10
        and all(v[k]["off_block"] <= 1e-10 and v[k]["block_error"] <= 1e-9
                for k in ("block_diag_third_order", "block_diag_p_order"))
    )

    runs = []
    for k in range(2):
        out_json = tmp_path / f"run{k}.json"
        _cli("tsvd", A, "-o", tmp_path / "g", "--threads", "1", "--json", out_json)
        norms = _cli("norms", A, "--threads", "1")[1]
        runs.append((out_json.read_bytes(), norms, (tmp_path / "g_S.ptns").read_bytes()))
    identical = runs[0] == runs[1]

    ok = not any(codes) and roundtrip <= 1e-9 and summary.get("multi_rank") == [2, 3, 1, 0, 2, 3] \
        and verify_ok and identical
    record("9", ok, f"gen->tsvd->truncate(full) rel err {roundtrip:.1e} (1e-9); verify within criteria 1-2 "
                    f"thresholds: {verify_ok}; byte-identical JSON and factors under --threads 1: {identical}")
