"""``ltensor`` command-line front end.

Exit codes: 0 success, 2 usage or file errors, 3 shape/transform mismatch,
4 numerical failure (singular slice, SVD non-convergence, failed check).

JSON summaries are written with sorted keys and two-space indentation.
Complex numbers appear as ``[re, im]`` pairs.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from math import prod
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import oracle
from .core import ShapeError, as_tensor, frobenius, slices
from .decomposition import (
    TSVDFactors,
    default_rank_tol,
    multi_rank,
    singular_spectrum,
    synthesize,
    truncate,
    tsvd,
    tubal_rank,
)
from .determinant import det_fast, identity_det_tube
from .envelope import (
    conjugate_lower_bound_check,
    random_in_ball,
    upsilon_biconjugate,
    upsilon_conjugate,
)
from .norms import tensor_norms
from .product import NumericalError, conj_transpose, identity_tensor, inverse_tensor, t_product_L
from .ptns import PTNSFormatError, read_ptns, write_ptns
from .transforms import TransformError, parse_transform

EXIT_USAGE, EXIT_SHAPE, EXIT_NUMERIC = 2, 3, 4
MAX_ELEMENTS = 2**26
SPECTRUM_HEAD = 8


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _shape_arg(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}") from None
    if len(dims) < 2 or any(n < 1 for n in dims):
        raise argparse.ArgumentTypeError(f"shape needs >= 2 positive dims, got {text!r}")
    return dims


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _tube_json(t) -> list[list[float]]:
    return [_cplx(z) for z in as_tensor(t).flat()]


def _emit(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _guard(shape, force: bool, label: str) -> None:
    if prod(shape) > MAX_ELEMENTS and not force:
        raise CLIError(f"{label}: {prod(shape)} elements exceeds 2^26; pass --force", EXIT_SHAPE)


def _load(path: str, force: bool):
    try:
        A = read_ptns(path)
    except FileNotFoundError:
        raise CLIError(f"{path}: no such file", EXIT_USAGE) from None
    except PTNSFormatError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    _guard(A.shape, force, path)
    return A


def _transform_for(args, tensors: dict):
    """Parse ``--transform`` against the first tensor; check all before dispatch."""
    first_path, first = next(iter(tensors.items()))
    try:
        L = parse_transform(args.transform, first.trailing_shape)
    except (TransformError, ShapeError) as exc:
        raise CLIError(f"{first_path}: {exc}", EXIT_SHAPE) from None
    for path, A in tensors.items():
        try:
            L.check(A)
        except ShapeError as exc:
            raise CLIError(f"{path}: {exc}", EXIT_SHAPE) from None
    return L


def _parse_rank(text: str):
    if text == "full":
        return None
    parts = [int(t) for t in text.split(",")]
    return parts[0] if len(parts) == 1 else parts


# -- subcommands -------------------------------------------------------------


def cmd_product(args):
    A, B = _load(args.A, args.force), _load(args.B, args.force)
    L = _transform_for(args, {args.A: A, args.B: B})
    if A.shape[1] != B.shape[0]:
        raise CLIError(
            f"{args.A} has {A.shape[1]} columns but {args.B} has {B.shape[0]} rows (axis 2 vs axis 1)",
            EXIT_SHAPE,
        )
    write_ptns(args.output, t_product_L(A, B, L))


def _summary(A, L, rel_tol=None):
    spec = singular_spectrum(A, L)
    mr = multi_rank(A, L, rel_tol)
    return {
        "shape": list(A.shape),
        "transform": L.name,
        "unitary": L.unitary,
        "rank_tol": rel_tol if rel_tol is not None else default_rank_tol(A.shape, L),
        "multi_rank": list(mr.ranks),
        "multi_rank_l1": mr.l1,
        "multi_rank_l2": mr.l2,
        "tubal_rank": tubal_rank(A, L, rel_tol),
        "spectrum_head": [float(v) for v in spec.values[:SPECTRUM_HEAD]],
    }


def cmd_tsvd(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    F = tsvd(A, L)
    files = {}
    for name, T in (("U", F.U), ("S", F.S), ("V", F.V)):
        path = f"{args.output}_{name}.ptns"
        write_ptns(path, T)
        files[name] = Path(path).name
    summary = _summary(A, L, args.rank_tol)
    summary["files"] = files
    _emit(summary, args.json)


def cmd_truncate(args):
    if args.factors:
        U, S, V = (_load(p, args.force) for p in args.factors)
        L = _transform_for(args, dict(zip(args.factors, (U, S, V))))
        F = TSVDFactors(U, S, V, L)
    elif args.A:
        A = _load(args.A, args.force)
        L = _transform_for(args, {args.A: A})
        F = tsvd(A, L)
    else:
        raise CLIError("truncate needs an input tensor or --factors U S V", EXIT_USAGE)
    try:
        out = truncate(F, _parse_rank(args.rank))
    except ValueError as exc:
        raise CLIError(f"--rank: {exc}", EXIT_USAGE) from None
    write_ptns(args.output, out)


def cmd_rank(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    _emit(_summary(A, L, args.rank_tol), args.json)


def cmd_norms(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    rep = tensor_norms(A, L)
    mr = multi_rank(A, L, args.rank_tol)
    _emit(
        {
            "nuclear": rep.nuclear,
            "spectral": rep.spectral,
            "unitary": rep.unitary_transform,
            "multi_rank_l1": mr.l1,
            "multi_rank_l2": mr.l2,
            "frobenius": frobenius(A),
            "transform": L.name,
        },
        args.json,
    )


def cmd_det(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    d = det_fast(A, L)
    if args.output:
        write_ptns(args.output, d)
    _emit(
        {
            "transform": L.name,
            "det": _tube_json(d),
            "det_transform_domain": _tube_json(L.forward(d)),
            "identity_det": _tube_json(identity_det_tube(L)),
        },
        args.json,
    )


def cmd_inverse(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    write_ptns(args.output, inverse_tensor(A, L))


def cmd_transpose(args):
    A = _load(args.A, args.force)
    L = _transform_for(args, {args.A: A})
    write_ptns(args.output, conj_transpose(A, L))


def cmd_verify(args):
    from .transforms import make_dft

    rng = np.random.default_rng(args.seed)
    if args.A and args.B:
        A = np.asarray(_load(args.A, args.force))
        B = np.asarray(_load(args.B, args.force))
    else:
        A = rng.standard_normal(args.shape)
        B = rng.standard_normal((args.shape[1], args.shape[0]) + tuple(args.shape[2:]))
    if A.ndim != 3 or B.ndim != 3:
        raise CLIError("verify compares against the classical t-product and needs third-order inputs", EXIT_SHAPE)
    if A.shape[1] != B.shape[0] or A.shape[2] != B.shape[2]:
        raise CLIError(f"shapes {A.shape} and {B.shape} do not conform", EXIT_SHAPE)

    classic = oracle.t_product_classic(A, B)
    ours = t_product_L(A, B, make_dft(A.shape[2:])).data
    prod_resid = float(np.linalg.norm(ours - classic) / max(np.linalg.norm(classic), 1e-300))
    bd3 = oracle.verify_block_diagonalization(A, "third_order")
    A4 = rng.standard_normal((2, 2, 3, 2))
    bdp = oracle.verify_block_diagonalization(A4, "p_order")
    result = {
        "classic_vs_L_residual": prod_resid,
        "block_diag_third_order": {"off_block": bd3.off_block, "block_error": bd3.block_error},
        "block_diag_p_order": {"off_block": bdp.off_block, "block_error": bdp.block_error, "shape": list(A4.shape)},
    }
    ok = (
        prod_resid <= 1e-10
        and bd3.off_block <= 1e-10
        and bd3.block_error <= 1e-9
        and bdp.off_block <= 1e-10
        and bdp.block_error <= 1e-9
    )
    result["pass"] = ok
    _emit(result, args.json)
    if not ok:
        raise CLIError("verification residuals above thresholds", EXIT_NUMERIC)


def cmd_envelope(args):
    rng = np.random.default_rng(args.seed)
    if args.Y:
        Y = _load(args.Y, args.force)
        shape = Y.shape
    else:
        shape = args.shape
        Y = None
    try:
        L = parse_transform(args.transform, shape[2:])
    except (TransformError, ShapeError) as exc:
        raise CLIError(str(exc), EXIT_SHAPE) from None
    if not L.unitary:
        raise CLIError(f"transform {L.name!r} is not unitary; envelope-check needs a unitary transform", EXIT_SHAPE)
    if Y is None:
        k = min(shape[0], shape[1])
        spectrum = -np.sort(-rng.uniform(0.0, args.spread, (L.n_slices, k)), axis=1)
        Y = synthesize(shape, None, L, rng, real_spectrum=spectrum)
    conj = upsilon_conjugate(Y, L)
    check = conjugate_lower_bound_check(Y, L, samples=args.samples, seed=args.seed)
    Z = random_in_ball(shape, L, rng)
    bic_in = upsilon_biconjugate(Z, L)
    bic_out = upsilon_biconjugate(Z * 2.0, L)
    result = {
        "shape": list(shape),
        "transform": L.name,
        "conjugate": conj.value,
        "active_count": conj.active_count,
        "sigma_max": conj.spectrum.sigma_max,
        "samples": check.samples,
        "max_violation": check.max_violation,
        "mean_objective": check.mean_objective,
        "maximizer_value": check.maximizer_value,
        "maximizer_gap": check.maximizer_gap,
        "biconjugate_in_ball": bic_in,
        "biconjugate_scaled_out": str(bic_out),
    }
    ok = check.max_violation <= 1e-8 and check.maximizer_gap <= 1e-8
    result["pass"] = ok
    _emit(result, args.json)
    if not ok:
        raise CLIError("envelope check failed", EXIT_NUMERIC)


def cmd_gen(args):
    _guard(args.shape, args.force, "--shape")
    rng = np.random.default_rng(args.seed)
    try:
        L = parse_transform(args.transform, args.shape[2:])
    except (TransformError, ShapeError) as exc:
        raise CLIError(str(exc), EXIT_SHAPE) from None
    if args.kind == "identity":
        if args.shape[0] != args.shape[1]:
            raise CLIError(f"identity needs equal leading dims, got {args.shape[:2]}", EXIT_SHAPE)
        A = identity_tensor(args.shape[0], args.shape[2:], L)
    elif args.kind == "random":
        A = as_tensor(rng.standard_normal(args.shape))
    else:
        try:
            ranks = _parse_rank(args.multirank)
            A = synthesize(args.shape, ranks, L, rng)
        except ValueError as exc:
            raise CLIError(f"--multirank: {exc}", EXIT_USAGE) from None
    write_ptns(args.output, A)


def cmd_bench(args):
    shapes = args.shapes or [(8, 8, 8), (6, 6, 4, 4), (4, 4, 3, 3, 3)]
    transforms = args.transforms.split(",")
    rng = np.random.default_rng(args.seed)
    rows = []
    for shape in shapes:
        A = as_tensor(rng.standard_normal(shape))
        B = as_tensor(rng.standard_normal((shape[1], shape[0]) + tuple(shape[2:])))
        for spec in transforms:
            L = parse_transform(spec, shape[2:])
            ops = {
                "product": lambda: t_product_L(A, B, L),
                "tsvd": lambda: tsvd(A, L).S,
            }
            for name, fn in ops.items():
                best = None
                for _ in range(args.repeats):
                    t0 = time.perf_counter_ns()
                    out = fn()
                    dt = time.perf_counter_ns() - t0
                    best = dt if best is None else min(best, dt)
                checksum = float(np.abs(slices(out)).sum())
                rows.append([name, "x".join(map(str, shape)), L.name, best, f"{checksum:.12e}"])
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subop", "shape", "transform", "wall_ns", "checksum"])
        w.writerows(rows)
    finally:
        if args.output:
            fh.close()


# -- parser ------------------------------------------------------------------


def _common(default_transform: str = "dft") -> argparse.ArgumentParser:
    # built per subcommand: argparse shares parent actions, so defaults must not be mutated
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--transform", default=default_transform, help="identity | dft | dft-unitary | dct | "
                        f"random-unitary:<seed> | random:<seed> | file:<sidecar.json> (default: {default_transform})")
    common.add_argument("--threads", type=int, default=1, help="BLAS thread cap (default 1)")
    common.add_argument("--force", action="store_true", help="allow tensors with more than 2^26 elements")
    return common


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ltensor", description="p-order tensor algebra under *_L")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, transform="dft"):
        sp = sub.add_parser(name, parents=[_common(transform)], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("product", cmd_product, "A *_L B")
    sp.add_argument("A")
    sp.add_argument("B")
    sp.add_argument("-o", "--output", required=True)

    sp = add("tsvd", cmd_tsvd, "t-SVD; writes <prefix>_U/_S/_V.ptns and a JSON summary")
    sp.add_argument("A")
    sp.add_argument("-o", "--output", required=True, help="output prefix")
    sp.add_argument("--json", help="write the summary here instead of stdout")
    sp.add_argument("--rank-tol", type=float)

    sp = add("truncate", cmd_truncate, "rank-truncated reconstruction")
    sp.add_argument("A", nargs="?")
    sp.add_argument("--factors", nargs=3, metavar=("U", "S", "V"))
    sp.add_argument("--rank", default="full", help="'full', an integer, or a comma list per slice")
    sp.add_argument("-o", "--output", required=True)

    for name, fn, help_ in (("rank", cmd_rank, "multi-rank and tubal rank"), ("norms", cmd_norms, "tensor norms")):
        sp = add(name, fn, help_)
        sp.add_argument("A")
        sp.add_argument("--json")
        sp.add_argument("--rank-tol", type=float)

    sp = add("det", cmd_det, "determinant tube (original and transform domain)")
    sp.add_argument("A")
    sp.add_argument("-o", "--output")
    sp.add_argument("--json")

    for name, fn, help_ in (("inverse", cmd_inverse, "A^{-1} under *_L"), ("transpose", cmd_transpose, "A^H under *_L")):
        sp = add(name, fn, help_)
        sp.add_argument("A")
        sp.add_argument("-o", "--output", required=True)

    sp = add("verify", cmd_verify, "cross-check against the bcirc oracle")
    sp.add_argument("A", nargs="?")
    sp.add_argument("B", nargs="?")
    sp.add_argument("--shape", type=_shape_arg, default=(3, 2, 4))
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json")

    sp = add("envelope-check", cmd_envelope, "conjugate / biconjugate checks", transform="dft-unitary")
    sp.add_argument("Y", nargs="?")
    sp.add_argument("--shape", type=_shape_arg, default=(3, 3, 2))
    sp.add_argument("--samples", type=int, default=1000)
    sp.add_argument("--spread", type=float, default=2.5, help="max singular value of generated Y")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json")

    sp = add("gen", cmd_gen, "synthesize a test tensor")
    sp.add_argument("--shape", type=_shape_arg, required=True)
    sp.add_argument("--kind", choices=("multirank", "identity", "random"), default="multirank")
    sp.add_argument("--multirank", default="full", help="'full', an integer, or a comma list per slice")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output", required=True)

    sp = add("bench", cmd_bench, "time product and tsvd; CSV output")
    sp.add_argument("--shapes", type=_shape_arg, nargs="*")
    sp.add_argument("--transforms", default="identity,dft,dft-unitary,dct,random:1")
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-o", "--output")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with threadpool_limits(limits=max(1, args.threads)):
            args.func(args)
    except CLIError as exc:
        print(f"ltensor: error: {exc}", file=sys.stderr)
        return exc.code
    except (ShapeError, TransformError) as exc:
        print(f"ltensor: error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"ltensor: error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ltensor: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
