"""Numba vs numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both paths are called directly, so the PAPRCAP_NUMBA flag does not matter here.
Results are checked for agreement before timing.
"""
import argparse
import math
import time

import numpy as np

from paprcap import _kernels as K
from paprcap.dtgc import DtgcProblem, _Grid


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_shift_sums(repeat):
    taus = np.linspace(0.0, 0.5, 513)
    rows = []
    for name, code, beta in (("RC", K.RC, 0.22), ("BTN", K.BTN, 0.16)):
        n = 1 << 12
        a = K.abs_shift_sums_nb(code, beta, 1.0, taus, n)
        b = K.abs_shift_sums_np(code, beta, 1.0, taus, n)
        assert np.allclose(a, b, rtol=1e-12, atol=0.0), name
        rows.append((f"abs_shift_sums {name} n={n}",
                     best_of(lambda: K.abs_shift_sums_nb(code, beta, 1.0, taus, n), repeat),
                     best_of(lambda: K.abs_shift_sums_np(code, beta, 1.0, taus, n), repeat)))
    return rows


def bench_transfers(repeat):
    g = _Grid(DtgcProblem(-12.0, 12.0, 10.0), 241)
    p = np.random.default_rng(0).random(g.n)
    p /= p.sum()
    q_nb = K.spread_nb(p, g.k, g.base, g.m, g.ny)
    q_np = K.spread_np(p, g.k, g.base, g.m, g.ny)
    assert np.allclose(q_nb, q_np, rtol=1e-10, atol=1e-300)
    v = np.log(q_nb)
    d_nb = K.gather_nb(v, g.k, g.base, g.m, g.n)
    d_np = K.gather_np(v, g.k, g.base, g.m, g.n)
    assert np.allclose(d_nb, d_np, rtol=1e-10)
    tag = f"n={g.n} ny={g.ny}"
    return [
        (f"spread {tag}", best_of(lambda: K.spread_nb(p, g.k, g.base, g.m, g.ny), repeat),
         best_of(lambda: K.spread_np(p, g.k, g.base, g.m, g.ny), repeat)),
        (f"gather {tag}", best_of(lambda: K.gather_nb(v, g.k, g.base, g.m, g.n), repeat),
         best_of(lambda: K.gather_np(v, g.k, g.base, g.m, g.n), repeat)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rows = bench_shift_sums(args.repeat) + bench_transfers(args.repeat)
    print(f"{'kernel':<36}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, t_nb, t_np in rows:
        print(f"{name:<36}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
