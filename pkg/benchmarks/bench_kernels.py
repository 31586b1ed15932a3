"""Time the compiled and numpy classical-map kernels on the same ensemble.

    python3 benchmarks/bench_kernels.py --particles 100000 --steps 100
"""

import argparse
import time

import numpy as np

from kicked_duo import derive_params, sample_ensemble
from kicked_duo.kernels import available_backends


def bench(backend, ensemble, steps, repeats):
    p = ensemble.params
    best = float("inf")
    for _ in range(repeats):
        R, P, r, pp = (getattr(ensemble, name).copy() for name in ("R", "P", "r", "p"))
        start = time.perf_counter()
        backend.coupled_steps(R, P, r, pp, steps, p.T / p.M, p.T / p.mu, p.w, p.K)
        best = min(best, time.perf_counter() - start)
    return best, P


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--particles", type=int, default=100_000)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    params = derive_params(hbar=0.25, w=0.5)
    ensemble = sample_ensemble(params, args.particles, seed=0)
    updates = args.particles * args.steps
    results = {}
    for name, backend in available_backends().items():
        seconds, P = bench(backend, ensemble, args.steps, args.repeats)
        results[name] = seconds
        print(f"{name:>7}: {seconds:8.3f} s  {updates / seconds / 1e6:8.1f} M particle-steps/s  <P^2> {np.mean(P**2):.4f}")
    if "cython" in results:
        print(f"speed-up: {results['python'] / results['cython']:.1f}x")
    else:
        print("compiled kernels not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
