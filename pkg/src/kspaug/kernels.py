"""Bicubic resampling kernels with a compiled fast path.

These two functions are the hot inner loop of every interpolating
augmentation (upsample, warp, downsample, per plane, per coil, per
slice, per epoch).  At import time the Cython extension is used when it
was built; otherwise the pure NumPy implementation takes over.  Both
produce bit-identical results, which `benchmarks/bench_warp.py` and the
kernel tests check.

Set ``KSPAUG_NO_EXT=1`` to force the NumPy fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

__all__ = ["BACKEND", "resize_bicubic", "warp_bicubic", "available_backends"]

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:
    _kernels = None

if _kernels is not None and os.environ.get("KSPAUG_NO_EXT", "0") == "0":
    _impl = _kernels
    BACKEND = "compiled"
else:
    _impl = _kernels_np
    BACKEND = "numpy"


def available_backends() -> dict:
    """Importable kernel implementations, keyed by name."""
    backends = {"numpy": _kernels_np}
    if _kernels is not None:
        backends["compiled"] = _kernels
    return backends


def _as_planes(planes: np.ndarray) -> np.ndarray:
    planes = np.ascontiguousarray(planes, dtype=np.float64)
    if planes.ndim != 3:
        raise ValueError(f"expected (planes, H, W) float batch, got shape {planes.shape}")
    return planes


def resize_bicubic(planes: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bicubic resize of a (B, H, W) float batch to (B, out_h, out_w)."""
    if out_h < 1 or out_w < 1:
        raise ValueError("output size must be positive")
    return _impl.resize_bicubic(_as_planes(planes), int(out_h), int(out_w))


def warp_bicubic(planes: np.ndarray, coeffs) -> np.ndarray:
    """Affine warp of a (B, H, W) float batch.

    ``coeffs`` are (a00, a01, a02, a10, a11, a12) mapping an output pixel
    (r, c) to the input position it samples, with bicubic interpolation
    and mirrored boundaries.
    """
    a00, a01, a02, a10, a11, a12 = (float(v) for v in coeffs)
    return _impl.warp_bicubic(_as_planes(planes), a00, a01, a02, a10, a11, a12)
