"""Time the compiled and NumPy kernels on analysis-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and backend with the best-of-N wall time and the
maximum deviation from the NumPy result.
"""
import argparse
import timeit

import numpy as np

from nlsscat.kernels import backends


def cases(rng):
    n = 1 << 14
    x0, dx = -1600.0, 3200.0 / n
    u = (rng.normal(size=n) + 1j * rng.normal(size=n)) * 0.1
    v = np.linspace(-3.0, 3.0, 1537)
    coef = rng.normal(size=400) + 1j * rng.normal(size=400)
    p = np.ascontiguousarray(rng.uniform(0.0, 3200.0, size=1537))
    def phase(k):
        w = u.copy()
        k.nonlinear_phase(w, 5e-3, 1.0, 0.0, 1.0)
        return w

    return {
        "nonlinear_phase": phase,
        "gaussian_moments": lambda k: k.gaussian_moments(u, x0, dx, 64.0, v, 9.0)[0],
        "fourier_series": lambda k: k.fourier_series(coef, -2.0, 0.01, p, 1.0),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the NumPy backend is available")
    rng = np.random.default_rng(0)
    for name, run in cases(rng).items():
        ref = run(impls["python"])
        times = {}
        for bname, mod in impls.items():
            times[bname] = min(timeit.repeat(lambda: run(mod), number=1, repeat=args.repeat))
            dev = float(np.max(np.abs(run(mod) - ref)))
            print(f"{name:18s} {bname:7s} {times[bname] * 1e3:9.3f} ms   max|diff| {dev:.2e}")
        if "cython" in times:
            print(f"{name:18s} speedup {times['python'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
