# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled bicubic resampling kernels.

Bit-compatible twin of ``_kernels_np``: same tap weights (Catmull-Rom,
a = -0.5), same mirror boundary, same left-fold accumulation order.
The build disables FP contraction so the arithmetic matches the NumPy
fallback exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

cdef double A = -0.5


cdef inline void _weights(double f, double* w) noexcept nogil:
    cdef double fp1 = f + 1.0
    cdef double omf = 1.0 - f
    cdef double tmf = 2.0 - f
    w[0] = ((A * fp1 - 5.0 * A) * fp1 + 8.0 * A) * fp1 - 4.0 * A
    w[1] = ((A + 2.0) * f - (A + 3.0)) * f * f + 1.0
    w[2] = ((A + 2.0) * omf - (A + 3.0)) * omf * omf + 1.0
    w[3] = ((A * tmf - 5.0 * A) * tmf + 8.0 * A) * tmf - 4.0 * A


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t period
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = i % period
    if i < 0:
        i += period
    if i >= n:
        i = period - i
    return i


def resize_bicubic(double[:, :, ::1] src, Py_ssize_t out_h, Py_ssize_t out_w):
    """Separable bicubic resize of a (B, H, W) batch: width pass, then height."""
    cdef Py_ssize_t b = src.shape[0]
    cdef Py_ssize_t h_in = src.shape[1]
    cdef Py_ssize_t w_in = src.shape[2]

    tmp_arr = np.empty((b, h_in, out_w), dtype=np.float64)
    out_arr = np.empty((b, out_h, out_w), dtype=np.float64)
    cw_arr = np.empty((out_w, 4), dtype=np.float64)
    ci_arr = np.empty((out_w, 4), dtype=np.intp)
    rw_arr = np.empty((out_h, 4), dtype=np.float64)
    ri_arr = np.empty((out_h, 4), dtype=np.intp)

    cdef double[:, :, ::1] tmp = tmp_arr
    cdef double[:, :, ::1] out = out_arr
    cdef double[:, ::1] cw = cw_arr
    cdef Py_ssize_t[:, ::1] ci = ci_arr
    cdef double[:, ::1] rw = rw_arr
    cdef Py_ssize_t[:, ::1] ri = ri_arr

    cdef double scale_w = (<double> w_in) / (<double> out_w)
    cdef double scale_h = (<double> h_in) / (<double> out_h)
    cdef double pos
    cdef Py_ssize_t i, r, c, m, base

    with nogil:
        for c in range(out_w):
            pos = c * scale_w
            base = <Py_ssize_t> floor(pos)
            _weights(pos - floor(pos), &cw[c, 0])
            for m in range(4):
                ci[c, m] = _reflect(base + m - 1, w_in)
        for r in range(out_h):
            pos = r * scale_h
            base = <Py_ssize_t> floor(pos)
            _weights(pos - floor(pos), &rw[r, 0])
            for m in range(4):
                ri[r, m] = _reflect(base + m - 1, h_in)

        for i in range(b):
            for r in range(h_in):
                for c in range(out_w):
                    tmp[i, r, c] = (
                        (cw[c, 0] * src[i, r, ci[c, 0]] + cw[c, 1] * src[i, r, ci[c, 1]])
                        + cw[c, 2] * src[i, r, ci[c, 2]]
                    ) + cw[c, 3] * src[i, r, ci[c, 3]]
        for i in range(b):
            for r in range(out_h):
                for c in range(out_w):
                    out[i, r, c] = (
                        (rw[r, 0] * tmp[i, ri[r, 0], c] + rw[r, 1] * tmp[i, ri[r, 1], c])
                        + rw[r, 2] * tmp[i, ri[r, 2], c]
                    ) + rw[r, 3] * tmp[i, ri[r, 3], c]
    return out_arr


def warp_bicubic(double[:, :, ::1] src, double a00, double a01, double a02,
                 double a10, double a11, double a12):
    """Affine warp of a (B, H, W) batch with 16-tap bicubic sampling."""
    cdef Py_ssize_t b = src.shape[0]
    cdef Py_ssize_t h = src.shape[1]
    cdef Py_ssize_t w = src.shape[2]

    out_arr = np.empty((b, h, w), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    cdef double r_in, c_in
    cdef double wy[4]
    cdef double wx[4]
    cdef double inner[4]
    cdef Py_ssize_t rows[4]
    cdef Py_ssize_t cols[4]
    cdef Py_ssize_t i, r, c, m, iy, ix

    with nogil:
        for r in range(h):
            for c in range(w):
                r_in = (a00 * r + a01 * c) + a02
                c_in = (a10 * r + a11 * c) + a12
                iy = <Py_ssize_t> floor(r_in)
                ix = <Py_ssize_t> floor(c_in)
                _weights(r_in - floor(r_in), wy)
                _weights(c_in - floor(c_in), wx)
                for m in range(4):
                    rows[m] = _reflect(iy + m - 1, h)
                    cols[m] = _reflect(ix + m - 1, w)
                for i in range(b):
                    for m in range(4):
                        inner[m] = (
                            (wx[0] * src[i, rows[m], cols[0]] + wx[1] * src[i, rows[m], cols[1]])
                            + wx[2] * src[i, rows[m], cols[2]]
                        ) + wx[3] * src[i, rows[m], cols[3]]
                    out[i, r, c] = (
                        (wy[0] * inner[0] + wy[1] * inner[1]) + wy[2] * inner[2]
                    ) + wy[3] * inner[3]
    return out_arr
