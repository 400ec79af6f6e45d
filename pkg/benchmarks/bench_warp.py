"""Benchmark the bicubic kernels: compiled extension vs NumPy fallback.

Times the full interpolating-augmentation chain (upsample, warp,
downsample) on a multi-coil slice for each available backend, and
checks that their outputs agree bit for bit.

Usage: python benchmarks/bench_warp.py [--coils N] [--height H] [--width W] [--repeats R]
"""

import argparse
import math
import time

import numpy as np

from kspaug.kernels import available_backends


def chain(mod, planes, upsample=2):
    b, h, w = planes.shape
    the = math.radians(15.0)
    cx, cy = (w * upsample - 1) / 2.0, (h * upsample - 1) / 2.0
    cos_t, sin_t = math.cos(the), math.sin(the)
    # inverse rotation about the upsampled center, (row, col) coefficients
    coeffs = (
        cos_t,
        -sin_t,
        cy - cos_t * cy + sin_t * cx,
        sin_t,
        cos_t,
        cx - sin_t * cy - cos_t * cx,
    )
    up = mod.resize_bicubic(planes, h * upsample, w * upsample)
    warped = mod.warp_bicubic(up, *coeffs)
    return mod.resize_bicubic(warped, h, w)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--coils", type=int, default=8)
    parser.add_argument("--height", type=int, default=640)
    parser.add_argument("--width", type=int, default=368)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    # one complex coil stack = 2 float planes per coil
    planes = np.ascontiguousarray(
        rng.standard_normal((2 * args.coils, args.height, args.width))
    )
    backends = available_backends()
    print(
        f"workload: {args.coils}-coil {args.height}x{args.width} slice "
        f"({planes.shape[0]} planes), 2x upsample + warp + downsample"
    )

    results = {}
    outputs = {}
    for name, mod in backends.items():
        chain(mod, planes[:2])  # warm-up
        best = math.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            out = chain(mod, planes)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        outputs[name] = out
        print(f"  {name:10s} {best * 1e3:9.1f} ms/slice")

    if len(outputs) == 2:
        a, b = outputs["numpy"], outputs["compiled"]
        identical = np.array_equal(a, b)
        print(f"  parity: bitwise identical = {identical} (max |diff| = {np.max(np.abs(a - b)):.3g})")
        print(f"  speedup: {results['numpy'] / results['compiled']:.2f}x")
    else:
        print("  compiled extension not built; only the NumPy fallback was timed")


if __name__ == "__main__":
    main()
