"""Timing comparison of the two kernel backends on the hot paths.

Run as a script:

    python3 benchmarks/bench_kernels.py [--cells 2000] [--particles 200000]

Each kernel is timed over several repetitions after a warmup call, so
the numba numbers exclude compilation.
"""

import argparse
import time

import numpy as np

from pmneumann import _encoding as enc
from pmneumann import _kernels_numpy as knp
from pmneumann._backend import HAS_NUMBA

if HAS_NUMBA:
    from pmneumann import _kernels_numba as knb


def timeit(fn, reps=5):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_implicit(mod, cells, lam):
    rng = np.random.default_rng(0)
    rhs = rng.random(cells)
    rhs /= rhs.mean()
    eta0 = np.zeros(cells)

    def job():
        mod.implicit_step(rhs, eta0, enc.SATURATING, 1.0, 1.0,
                          np.array([0.0]), lam, 1e-12, 500000, False)
    return timeit(job)


def bench_em(mod, n, cells):
    rng = np.random.default_rng(1)
    pos = rng.random(n) * 4.0
    xi = rng.standard_normal(n)
    chi = 0.5 + rng.random(cells)
    zd = np.zeros(cells, dtype=bool)
    occ = np.zeros(n)

    def job():
        mod.em_update(pos, xi, chi, 1.0, zd, 0.0, 4.0 / cells, 1e-3,
                      np.sqrt(1e-3), occ, 0.02)
    return timeit(job)


def bench_reflect(mod, n, cells):
    rng = np.random.default_rng(2)
    pos = rng.random(n) * 4.0
    xi = rng.standard_normal(n)
    chi = 0.5 + rng.random(cells)
    zd = np.zeros(cells, dtype=bool)
    big_k = np.zeros(n)
    xdk = np.zeros(n)
    occ = np.zeros(n)

    def job():
        mod.reflect_update(pos, xi, chi, 1.0, zd, 0.0, 4.0 / cells, 1e-3,
                           np.sqrt(1e-3), big_k, xdk, occ, 0.02)
    return timeit(job)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=2000)
    ap.add_argument("--particles", type=int, default=200000)
    args = ap.parse_args()

    lam = 8.0  # dt / (2 dx^2) regime of the acceptance runs
    rows = []
    mods = [("numpy", knp)]
    if HAS_NUMBA:
        mods.append(("numba", knb))
        # trigger compilation outside the timed region
        bench_implicit(knb, 64, lam)
        bench_em(knb, 64, 16)
        bench_reflect(knb, 64, 16)
    else:
        print("numba not importable; timing the numpy backend only")

    for name, mod in mods:
        rows.append((f"implicit_step[{args.cells} cells, lam={lam:g}]",
                     name, bench_implicit(mod, args.cells, lam)))
        rows.append((f"em_update[{args.particles} particles]",
                     name, bench_em(mod, args.particles, args.cells)))
        rows.append((f"reflect_update[{args.particles} particles]",
                     name, bench_reflect(mod, args.particles, args.cells)))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  backend  best of 5")
    for kernel, name, secs in sorted(rows):
        print(f"{kernel:<{width}}  {name:<7}  {secs * 1e3:8.2f} ms")
    if HAS_NUMBA:
        by = {}
        for kernel, name, secs in rows:
            by.setdefault(kernel, {})[name] = secs
        print()
        for kernel, d in sorted(by.items()):
            print(f"{kernel:<{width}}  speedup x{d['numpy'] / d['numba']:.1f}")


if __name__ == "__main__":
    main()
