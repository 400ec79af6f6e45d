"""Core 2D array containers and elementwise helpers.

One in-memory convention is used everywhere: arrays are row-major,
complex samples are NumPy's native interleaved (re, im) float pairs,
and a coil stack is a 3D array of shape (coils, height, width).  A
"grid" below is either a single 2D image/k-space plane or a coil stack;
all operations act on the trailing two axes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ShapeError",
    "as_complex_grid",
    "as_real_grid",
    "as_coil_stack",
    "require_finite",
    "center_crop",
    "l2_norm",
    "add",
    "scale",
    "elementwise_abs",
]


class ShapeError(ValueError):
    """Operands do not have compatible dimensions."""


def require_finite(g: np.ndarray, name: str = "array") -> np.ndarray:
    """Raise ValueError if ``g`` contains NaN or Inf samples."""
    if not np.all(np.isfinite(g)):
        raise ValueError(f"{name} contains non-finite samples")
    return g


def as_complex_grid(data, name: str = "grid") -> np.ndarray:
    """Coerce to a finite 2D complex128 array."""
    g = np.asarray(data, dtype=np.complex128)
    if g.ndim != 2:
        raise ShapeError(f"{name} must be 2D, got shape {g.shape}")
    return require_finite(g, name)


def as_real_grid(data, name: str = "grid") -> np.ndarray:
    """Coerce to a finite 2D float64 array."""
    g = np.asarray(data, dtype=np.float64)
    if g.ndim != 2:
        raise ShapeError(f"{name} must be 2D, got shape {g.shape}")
    return require_finite(g, name)


def as_coil_stack(data, name: str = "stack") -> np.ndarray:
    """Coerce to a finite (coils, height, width) complex128 array."""
    g = np.asarray(data, dtype=np.complex128)
    if g.ndim != 3 or g.shape[0] < 1:
        raise ShapeError(f"{name} must have shape (coils, H, W), got {g.shape}")
    return require_finite(g, name)


def center_crop(g: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Return the centered ``out_h x out_w`` window of the trailing two axes.

    For odd margins the extra row/column is dropped from the bottom/right,
    i.e. the start offset is floor((in - out) / 2) on each axis.
    """
    h, w = g.shape[-2:]
    if out_h <= 0 or out_w <= 0:
        raise ShapeError(f"crop size must be positive, got ({out_h}, {out_w})")
    if out_h > h or out_w > w:
        raise ShapeError(f"crop ({out_h}, {out_w}) exceeds input ({h}, {w})")
    top = (h - out_h) // 2
    left = (w - out_w) // 2
    return g[..., top : top + out_h, left : left + out_w].copy()


def l2_norm(g: np.ndarray) -> float:
    """Euclidean norm over all samples (modulus for complex grids)."""
    return float(np.linalg.norm(np.asarray(g).ravel()))


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise sum; the operands must have identical shapes."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a + b


def scale(g: np.ndarray, alpha: complex | float) -> np.ndarray:
    """Multiply every sample by a scalar."""
    return np.asarray(g) * alpha


def elementwise_abs(g: np.ndarray) -> np.ndarray:
    """Pixelwise modulus; always a real-valued grid."""
    return np.abs(np.asarray(g))
