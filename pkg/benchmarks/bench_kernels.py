"""Compare the numba and numpy state-vector kernels.

    python benchmarks/bench_kernels.py [--electrons 8] [--repeat 20]

Applies one single-qubit and one two-qubit gate to every qubit (pair) of a
random register and reports the best wall time per sweep for each backend.
The numba kernels are compiled once before timing.
"""

import argparse
import time

import numpy as np

from spinqnet import _kernels


def sweep(kernels, psi, u1, u2):
    n = psi.shape[0].bit_length() - 1
    for t in range(n):
        kernels.apply_1q(psi, u1, t)
    for t in range(n - 1):
        kernels.apply_2q(psi, u2, t, t + 1)


def best_time(kernels, psi, u1, u2, repeat):
    best = float("inf")
    for _ in range(repeat):
        buf = psi.copy()
        start = time.perf_counter()
        sweep(kernels, buf, u1, u2)
        best = min(best, time.perf_counter() - start)
    return best, buf


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--electrons", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    dim = 4 ** args.electrons
    psi = (rng.normal(size=(dim, 1)) + 1j * rng.normal(size=(dim, 1)))
    psi /= np.linalg.norm(psi)
    u1, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    u2, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))

    results = {}
    for name in _kernels.available_backends():
        kernels = _kernels.get_backend(name)
        sweep(kernels, psi.copy(), u1, u2)  # warm-up (JIT compile for numba)
        results[name] = best_time(kernels, psi, u1, u2, args.repeat)

    print(f"{args.electrons} electrons ({dim} amplitudes), best of {args.repeat}")
    for name, (t, _) in results.items():
        print(f"  {name:6s} {t * 1e3:9.3f} ms")
    if "numba" in results:
        diff = np.max(np.abs(results["numba"][1] - results["numpy"][1]))
        print(f"  speed-up numba/numpy: {results['numpy'][0] / results['numba'][0]:.2f}x, max |diff| {diff:.1e}")
    else:
        print("  numba not installed; install the 'jit' extra to compare")


if __name__ == "__main__":
    main()
