"""Pure NumPy bicubic resampling kernels.

Reference implementation for the compiled extension: both backends
evaluate the exact same expressions in the exact same order (Catmull-Rom
cubic convolution, a = -0.5; mirror boundary without edge repetition;
left-fold accumulation of the four taps), so their outputs agree to the
last bit on any input.

Coordinate conventions, shared with `_kernels.pyx`:

* resize maps output index ``o`` on an axis to input position
  ``o * (in_size / out_size)`` (anchored at index 0).  Integer
  down-factors therefore hit input samples exactly, which makes
  upsample-by-u followed by downsample-by-u an exact round trip.
* warp maps output pixel (r, c) to input position
  ``r_in = a00*r + a01*c + a02``, ``c_in = a10*r + a11*c + a12``.

Inputs are batches of float64 planes with shape (B, H, W).
"""

from __future__ import annotations

import numpy as np

_A = -0.5  # Catmull-Rom


def _cubic_weights(f):
    """Tap weights at offsets (-1, 0, +1, +2) for fractional position f."""
    fp1 = f + 1.0
    omf = 1.0 - f
    tmf = 2.0 - f
    w0 = ((_A * fp1 - 5.0 * _A) * fp1 + 8.0 * _A) * fp1 - 4.0 * _A
    w1 = ((_A + 2.0) * f - (_A + 3.0)) * f * f + 1.0
    w2 = ((_A + 2.0) * omf - (_A + 3.0)) * omf * omf + 1.0
    w3 = ((_A * tmf - 5.0 * _A) * tmf + 8.0 * _A) * tmf - 4.0 * _A
    return w0, w1, w2, w3


def _reflect(idx, n):
    """Mirror indices about the edge samples (period 2n-2)."""
    if n == 1:
        return np.zeros_like(idx)
    period = 2 * (n - 1)
    idx = np.mod(idx, period)
    return np.where(idx >= n, period - idx, idx)


def _axis_taps(out_size, in_size):
    pos = np.arange(out_size, dtype=np.float64) * (in_size / out_size)
    base = np.floor(pos)
    f = pos - base
    weights = _cubic_weights(f)
    ibase = base.astype(np.int64)
    taps = [_reflect(ibase + m - 1, in_size) for m in range(4)]
    return taps, weights


def resize_bicubic(src: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bicubic resize of a (B, H, W) batch: width pass, then height."""
    b, h_in, w_in = src.shape
    cols, wx = _axis_taps(out_w, w_in)
    tmp = wx[0] * src[:, :, cols[0]]
    for m in range(1, 4):
        tmp += wx[m] * src[:, :, cols[m]]

    rows, wy = _axis_taps(out_h, h_in)
    out = wy[0][:, None] * tmp[:, rows[0], :]
    for m in range(1, 4):
        out += wy[m][:, None] * tmp[:, rows[m], :]
    return np.ascontiguousarray(out)


def warp_bicubic(
    src: np.ndarray,
    a00: float,
    a01: float,
    a02: float,
    a10: float,
    a11: float,
    a12: float,
) -> np.ndarray:
    """Affine warp of a (B, H, W) batch with 16-tap bicubic sampling."""
    b, h, w = src.shape
    rr = np.arange(h, dtype=np.float64)[:, None]
    cc = np.arange(w, dtype=np.float64)[None, :]
    r_in = (a00 * rr + a01 * cc) + a02
    c_in = (a10 * rr + a11 * cc) + a12

    iy = np.floor(r_in)
    fy = r_in - iy
    ix = np.floor(c_in)
    fx = c_in - ix
    wy = _cubic_weights(fy)
    wx = _cubic_weights(fx)
    rows = [_reflect(iy.astype(np.int64) + m - 1, h) for m in range(4)]
    cols = [_reflect(ix.astype(np.int64) + n - 1, w) for n in range(4)]

    out = None
    for m in range(4):
        inner = wx[0] * src[:, rows[m], cols[0]]
        for n in range(1, 4):
            inner += wx[n] * src[:, rows[m], cols[n]]
        out = wy[m] * inner if out is None else out + wy[m] * inner
    return np.ascontiguousarray(out)
