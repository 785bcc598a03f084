"""Compare the compiled and numpy kernel backends on training-shaped data.

Runs the fused cross-entropy kernel and row softmax over batches shaped
like real training steps (batch x 24 labels) and over one large matrix,
reporting wall time per call and the speedup. Also cross-checks that
both backends agree numerically before timing anything.

Usage: python benchmarks/bench_kernels.py [--batch 32] [--repeat 2000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from spantag import kernels


def check_agreement(rng: np.random.Generator) -> float:
    """Max |compiled - pure| over loss, weight, and gradient entries."""
    if not kernels.HAVE_COMPILED:
        return 0.0
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 200))
        k = int(rng.integers(2, 30))
        logits = np.ascontiguousarray(rng.normal(scale=3.0, size=(n, k)))
        labels = np.ascontiguousarray(rng.integers(0, k, size=n), dtype=np.intp)
        weights = np.ascontiguousarray(rng.uniform(0.1, 2.0, size=k))
        for cw in (None, weights):
            empty = np.zeros(0) if cw is None else cw
            a = kernels._compiled.xent_grad(logits, labels, empty)
            b = kernels._xent_grad_np(logits, labels, empty)
            worst = max(
                worst,
                abs(a[0] - b[0]),
                abs(a[1] - b[1]),
                float(np.abs(a[2] - b[2]).max()),
            )
        worst = max(
            worst,
            float(
                np.abs(
                    kernels._compiled.softmax_rows(logits)
                    - kernels._softmax_rows_np(logits)
                ).max()
            ),
        )
    return worst


def time_fn(fn, repeat: int) -> float:
    start = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - start) / repeat


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--labels", type=int, default=24)
    parser.add_argument("--repeat", type=int, default=2000)
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    if not kernels.HAVE_COMPILED:
        print("compiled extension unavailable; nothing to compare")
        return 0

    rng = np.random.default_rng(0)
    disagreement = check_agreement(rng)
    print(f"backend agreement: max abs difference {disagreement:.3e}")
    if disagreement > 1e-9:
        print("backends disagree beyond rounding; refusing to time")
        return 1

    cases = [
        ("batch", (args.batch, args.labels), args.repeat),
        ("full-corpus", (5000, args.labels), max(args.repeat // 100, 10)),
    ]
    for name, shape, repeat in cases:
        logits = np.ascontiguousarray(rng.normal(size=shape))
        labels = np.ascontiguousarray(rng.integers(0, shape[1], size=shape[0]), dtype=np.intp)
        empty = np.zeros(0)
        t_c = time_fn(lambda: kernels._compiled.xent_grad(logits, labels, empty), repeat)
        t_p = time_fn(lambda: kernels._xent_grad_np(logits, labels, empty), repeat)
        print(
            f"xent_grad {name} {shape[0]}x{shape[1]}: "
            f"compiled {t_c * 1e6:8.1f} us  numpy {t_p * 1e6:8.1f} us  "
            f"speedup {t_p / t_c:5.2f}x"
        )
        t_c = time_fn(lambda: kernels._compiled.softmax_rows(logits), repeat)
        t_p = time_fn(lambda: kernels._softmax_rows_np(logits), repeat)
        print(
            f"softmax   {name} {shape[0]}x{shape[1]}: "
            f"compiled {t_c * 1e6:8.1f} us  numpy {t_p * 1e6:8.1f} us  "
            f"speedup {t_p / t_c:5.2f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
