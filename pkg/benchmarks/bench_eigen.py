"""Benchmark the two eigensolver backends against each other.

Times sym_eigh on random symmetric matrices for the compiled cyclic-Jacobi
kernel and the LAPACK fallback, and reports the largest disagreement in
eigenvalues and in reconstructed matrices so speed numbers come with an
accuracy cross-check.

Run:  python3 benchmarks/bench_eigen.py [--sizes 32,64,128,256,440] [--repeats 3]
"""

import argparse
import time

import numpy as np

from instreval._kernels import available_backends, sym_eigh


def random_symmetric(n: int, seed: int) -> np.ndarray:
    g = np.random.Generator(np.random.Philox(seed))
    r = g.standard_normal((n, n))
    return (r + r.T) / 2.0


def time_backend(a: np.ndarray, backend: str, vectors: bool, repeats: int) -> tuple[float, tuple]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = sym_eigh(a, vectors=vectors, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="32,64,128,256,440")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = available_backends()
    if len(backends) < 2:
        print(f"only {backends[0]} available; build the extension to compare")
        return 1

    print(f"{'n':>5} {'mode':>8} " + " ".join(f"{b + ' (s)':>12}" for b in backends)
          + f" {'max |dw|':>10} {'max |resid|':>12}")
    for n in sizes:
        a = random_symmetric(n, seed=n)
        for vectors in (False, True):
            times = {}
            spectra = {}
            residual = 0.0
            for backend in backends:
                elapsed, (w, v) = time_backend(a, backend, vectors, args.repeats)
                times[backend] = elapsed
                spectra[backend] = w
                if vectors:
                    residual = max(residual, float(np.abs(v @ np.diag(w) @ v.T - a).max()))
            dw = float(np.abs(spectra[backends[0]] - spectra[backends[1]]).max())
            mode = "vectors" if vectors else "values"
            resid_text = f"{residual:>12.2e}" if vectors else f"{'-':>12}"
            print(f"{n:>5} {mode:>8} "
                  + " ".join(f"{times[b]:>12.4f}" for b in backends)
                  + f" {dw:>10.2e} {resid_text}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
