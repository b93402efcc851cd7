"""Benchmark the compiled vs pure-NumPy lumpy deposition kernels.

Usage: python benchmarks/bench_lumpy.py [--samples N]

Reports fields/second for representative 2-D and 3-D configurations and the
max relative disagreement between backends on a shared draw.
"""
import argparse
import time

import numpy as np

from somgan.objects import LumpyParams, kernels, sample_lumpy
from somgan.objects.lumpy import CUTOFF_SIGMAS, draw_lump_centers


def bench_case(name, params, n_samples):
    print(f"\n{name}: shape={params.field_shape} mean_count={params.mean_count} "
          f"width={params.width}")
    centers = draw_lump_centers(
        LumpyParams(params.field_shape, params.mean_count * n_samples,
                    params.amplitude, params.width),
        np.random.default_rng(0))
    reference = {}
    for backend in kernels.available_backends():
        dep2, dep3 = kernels.get_backend(backend)
        deposit = dep2 if params.dims == 2 else dep3
        field = np.zeros(params.field_shape)
        t0 = time.perf_counter()
        deposit(field, centers, params.amplitude, params.width, CUTOFF_SIGMAS)
        dt = time.perf_counter() - t0
        rate = n_samples / dt
        print(f"  {backend:>7}: {dt:8.3f}s for ~{n_samples} fields worth of blobs "
              f"({rate:8.1f} fields/s)")
        reference[backend] = field
    if len(reference) == 2:
        a, b = reference.values()
        denom = max(np.abs(a).max(), 1e-30)
        print(f"  max relative backend disagreement: "
              f"{np.abs(a - b).max() / denom:.3e}")


def bench_sampling(n_samples):
    params = LumpyParams(field_shape=(64, 64), mean_count=80, amplitude=1.0, width=2.5)
    print(f"\nend-to-end sample_lumpy ({n_samples} fields, 64x64, active backend "
          f"{kernels.BACKEND}):")
    t0 = time.perf_counter()
    for i in range(n_samples):
        sample_lumpy(params, np.random.default_rng(i))
    dt = time.perf_counter() - t0
    print(f"  {dt:.3f}s ({n_samples / dt:.1f} fields/s)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=500,
                    help="equivalent number of fields per case")
    args = ap.parse_args()
    print(f"available backends: {kernels.available_backends()}")
    bench_case("2D 64x64", LumpyParams((64, 64), 80, 1.0, 2.5), args.samples)
    bench_case("2D 128x128", LumpyParams((128, 128), 150, 1.0, 3.0), args.samples // 2)
    bench_case("3D 32^3", LumpyParams((32, 32, 32), 120, 1.0, 2.0), args.samples // 2)
    bench_sampling(args.samples)


if __name__ == "__main__":
    main()
