"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 3]

Times (1) the simplex loop on B&B-sized and larger random LPs, (2) the
exhaustive sign-pattern search, and (3) a full B&B precode at M=10 with
each backend swapped in.
"""

import argparse
import time

import numpy as np

from onebit_bnb import _pykernels, kernels
from onebit_bnb.lp import LinearProgram, solve_lp
from onebit_bnb.model import draw_channel, draw_symbols, margin_matrix, one_bit_amplitude
from onebit_bnb.precoders import bnb_precode


def _random_lps(rng, count, n, m):
    out = []
    for _ in range(count):
        A = rng.standard_normal((m, n))
        lo, hi = -np.ones(n), np.ones(n)
        b = A @ rng.uniform(-1, 1, n) - rng.uniform(0, 1, m)
        out.append(LinearProgram(rng.standard_normal(n), A, b, lo, hi))
    return out


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _with_backend(backend, fn):
    saved = kernels.simplex_loop, kernels.best_sign_pattern
    kernels.simplex_loop, kernels.best_sign_pattern = backend.simplex_loop, backend.best_sign_pattern
    try:
        return fn()
    finally:
        kernels.simplex_loop, kernels.best_sign_pattern = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        print("compiled backend not built; only the numpy backend is available")
    backends = {"python": _pykernels}
    if kernels.compiled_backend is not None:
        backends["compiled"] = kernels.compiled_backend

    rng = np.random.default_rng(0)
    cases = {
        "lp n=21 m=4 (x200)": _random_lps(rng, 200, 21, 4),
        "lp n=40 m=80 (x50)": _random_lps(rng, 50, 40, 80),
    }
    H = draw_channel(rng, 2, 1, 10)
    s = draw_symbols(rng, 2)
    G = np.ascontiguousarray(margin_matrix(H, s))

    print(f"{'case':28s}" + "".join(f"{name:>14s}" for name in backends))
    for label, lps in cases.items():
        row = [_best(lambda: [solve_lp(p, kernel=b.simplex_loop) for p in lps], args.repeat)
               for b in backends.values()]
        print(f"{label:28s}" + "".join(f"{t:13.4f}s" for t in row))
    row = [_best(lambda: b.best_sign_pattern(G, one_bit_amplitude(10), 1e-12), 1) for b in backends.values()]
    print(f"{'exhaustive M=10 (4^10)':28s}" + "".join(f"{t:13.4f}s" for t in row))
    row = [_best(lambda: _with_backend(b, lambda: bnb_precode(H, s)), args.repeat) for b in backends.values()]
    print(f"{'bnb_precode M=10 KL=2':28s}" + "".join(f"{t:13.4f}s" for t in row))


if __name__ == "__main__":
    main()
