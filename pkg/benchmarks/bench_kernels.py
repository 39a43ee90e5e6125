"""Time each hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--sizes 20 60 120] [--repeat 5]

Numba timings exclude compilation: every kernel is called once before timing.
Both backends must agree to 1e-8 relative, otherwise the row is flagged.
"""
import argparse
import time

import numpy as np

from linmod import kernels


def cases(n, rng):
    a = rng.standard_normal((n, n))
    tall = rng.standard_normal((2 * n, n))
    sym = a + a.T
    upper = np.triu(a) + n * np.eye(n)
    xs = np.linspace(0.001, 0.999, 50 * n)
    return {
        "matmul": lambda: kernels.matmul(a, a),
        "solve_triangular": lambda: kernels.solve_triangular(upper, a, True, 1e-12)[0],
        "rref": lambda: kernels.rref(tall, 1e-10)[0],
        "householder_qr": lambda: kernels.householder_qr(tall, n)[1],
        "givens_qr": lambda: kernels.givens_qr(tall)[1],
        "gram_schmidt": lambda: kernels.gram_schmidt(tall, 1e-10)[1],
        "jacobi_eigh": lambda: kernels.jacobi_eigh(sym, 1e-15, 100)[0],
        "betainc": lambda: kernels.betainc(2.5, 7.0, xs, 1e-12, 300)[0],
    }


def best_of(fn, repeat):
    out = fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 60, 120])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    names = kernels.available_backends()
    if "numba" not in names:
        print("numba is not importable; only the numpy backend can be timed")
    print(f"{'kernel':<18}{'n':>5}" + "".join(f"{b + ' ms':>12}" for b in names) + f"{'speedup':>10}  agree")
    for n in args.sizes:
        for name in cases(n, np.random.default_rng(n)):
            row, outs = {}, {}
            for b in names:
                with kernels.backend(b):
                    fn = cases(n, np.random.default_rng(n))[name]
                    row[b], outs[b] = best_of(fn, args.repeat)
            ref = outs["numpy"]
            agree = all(
                np.max(np.abs(np.asarray(o) - ref), initial=0.0) <= 1e-8 * max(1.0, np.max(np.abs(ref), initial=0.0))
                for o in outs.values()
            )
            speed = f"{row['numpy'] / row['numba']:>9.1f}x" if "numba" in row else f"{'-':>10}"
            cells = "".join(f"{1e3 * row[b]:>12.3f}" for b in names)
            print(f"{name:<18}{n:>5}{cells}{speed}  {'yes' if agree else 'NO'}")


if __name__ == "__main__":
    main()
