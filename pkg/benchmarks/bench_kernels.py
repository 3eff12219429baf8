"""Time the compiled kernels against the pure-Python fallback.

Both backends compute bit-identical results (the test suite enforces
that); this script measures what the compiled extension buys. Run as

    python3 benchmarks/bench_kernels.py [--entities N] [--dim D] [--repeat R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ddikge.backend import available_backends
from ddikge.rng import RngStream


def _rand(shape, rng: RngStream) -> np.ndarray:
    return np.ascontiguousarray(2.0 * rng.uniform(shape) - 1.0)


def build_cases(n_entities: int, dim: int):
    """Name -> zero-argument closure factory taking the kernel module."""
    rng = RngStream(7)
    ent = _rand((n_entities, 2 * dim), rng)
    rel = _rand((2 * dim,), rng)
    h = _rand((2 * dim,), rng)
    a = _rand((64, dim), rng)
    b = _rand((dim, 64), rng)
    x = _rand((2, dim), rng)
    filters = _rand((8, 2, 3), rng)
    logits = _rand((n_entities,), rng)
    u = rng.uniform((n_entities,))

    def cases(k):
        return (
            ("sweep complex", lambda: k.sweep_scores(3, ent, rel, h, 0)),
            ("sweep rotate", lambda: k.sweep_scores(5, ent, rel[:dim], h, 0)),
            ("score_one x1k", lambda: [k.score_one(3, h, rel, h)
                                       for _ in range(1000)]),
            ("grad_one x1k", lambda: [k.grad_one(3, h, rel, h)
                                      for _ in range(1000)]),
            ("matmul 64xDx64", lambda: k.matmul(a, b)),
            ("conv2d fwd", lambda: k.conv2d_forward(x, filters)),
            ("softmax", lambda: k.softmax_temp(logits, 1.0)),
            ("gumbel", lambda: k.gumbel_from_uniform(u)),
        )

    return cases


def timed(fn, repeat: int) -> float:
    fn()  # warm up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entities", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled backend not built; timing the python fallback only")
    cases = build_cases(args.entities, args.dim)

    names = [n for n, _ in cases(backends["python"])]
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}  {'python':>10}"
    if "compiled" in backends:
        header += f"  {'compiled':>10}  {'speedup':>8}"
    print(f"entities={args.entities} dim={args.dim} best of {args.repeat}")
    print(header)
    for i, name in enumerate(names):
        py = timed(cases(backends["python"])[i][1], args.repeat)
        line = f"{name:<{width}}  {py * 1e3:>8.3f}ms"
        if "compiled" in backends:
            ck = timed(cases(backends["compiled"])[i][1], args.repeat)
            line += f"  {ck * 1e3:>8.3f}ms  {py / ck:>7.1f}x"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
