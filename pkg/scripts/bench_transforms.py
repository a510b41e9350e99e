"""Time the *_L product and the t-SVD across transforms and shapes.

Prints a table of median wall times in milliseconds.
"""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from ltensor.decomposition import tsvd
from ltensor.product import t_product_L
from ltensor.transforms import BUILTIN_TRANSFORMS, parse_transform


@dataclass
class BenchConfig:
    shapes: tuple[tuple[int, ...], ...] = ((16, 16, 16), (8, 8, 8, 8), (6, 6, 4, 4, 4))
    transforms: tuple[str, ...] = BUILTIN_TRANSFORMS
    repeats: int = 5
    threads: int = 1
    seed: int = 0


def _spec(name: str, seed: int) -> str:
    return f"{name}:{seed}" if name.startswith("random") else name


def _median_ms(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * float(np.median(times))


def run(cfg: BenchConfig) -> list[tuple[str, str, float, float]]:
    rng = np.random.default_rng(cfg.seed)
    out = []
    with threadpool_limits(cfg.threads):
        for shape in cfg.shapes:
            A = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            B = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            for name in cfg.transforms:
                L = parse_transform(_spec(name, cfg.seed), shape[2:])
                prod = _median_ms(lambda: t_product_L(A, B, L), cfg.repeats)
                svd = _median_ms(lambda: tsvd(A, L), cfg.repeats)
                out.append(("x".join(map(str, shape)), name, prod, svd))
    return out


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeats", type=int, default=BenchConfig.repeats)
    p.add_argument("--threads", type=int, default=BenchConfig.threads)
    a = p.parse_args()
    print(f"{'shape':<14}{'transform':<16}{'product ms':>12}{'tsvd ms':>12}")
    for shape, name, prod, svd in run(BenchConfig(repeats=a.repeats, threads=a.threads)):
        print(f"{shape:<14}{name:<16}{prod:>12.3f}{svd:>12.3f}")
