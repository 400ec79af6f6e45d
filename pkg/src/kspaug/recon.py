"""Classical reconstructors: zero-filled baseline and TV-regularized descent.

The iterative solver minimizes  || A(x) - k ||^2 + lambda * TV_mu(x)
over the coil-image stack, where TV_mu is anisotropic total variation
smoothed as sqrt(|d|^2 + mu^2) so plain gradient descent applies.  Each
coil is recovered independently; the returned image is the
center-cropped RSS of the final iterate.
"""

from __future__ import annotations

import numpy as np

from .acquisition import UndersamplingMask, adjoint, forward, rss
from .grid import center_crop

__all__ = [
    "ReconDivergenceError",
    "zero_filled",
    "tv_value_and_grad",
    "tv_minimize",
    "tv_reconstruct",
    "gradient_check",
]


class ReconDivergenceError(RuntimeError):
    """Objective kept increasing after the maximum number of step halvings."""


def zero_filled(k, mask: UndersamplingMask, crop_h: int, crop_w: int) -> np.ndarray:
    """Adjoint reconstruction: inverse FFT of the masked data, RSS, crop."""
    return center_crop(rss(adjoint(k, mask)), crop_h, crop_w)


def tv_value_and_grad(x, k, mask: UndersamplingMask, lam: float, mu: float):
    """Objective value and gradient of the TV-regularized least squares.

    The data term is the unsquared-root norm ||A(x) - k||^2 with gradient
    2 * adjoint(A(x) - k); the smoothed-TV gradient is the divergence of
    the normalized forward differences.  Complex images are treated as
    real pairs, so the gradient is the usual R^{2n} one written as a
    complex array.
    """
    x = np.asarray(x, dtype=np.complex128)
    r = forward(x, mask) - k
    value = float(np.sum(r.real**2 + r.imag**2))
    grad = 2.0 * adjoint(r, mask)
    if lam > 0.0:
        for axis in (-2, -1):
            d = np.diff(x, axis=axis)
            mag = np.sqrt(d.real**2 + d.imag**2 + mu * mu)
            value += lam * float(np.sum(mag))
            q = d / mag
            upper = [slice(None)] * x.ndim
            lower = [slice(None)] * x.ndim
            upper[axis] = slice(1, None)
            lower[axis] = slice(None, -1)
            grad[tuple(upper)] += lam * q
            grad[tuple(lower)] -= lam * q
    return value, grad


def tv_minimize(
    k,
    mask: UndersamplingMask,
    lam: float,
    iters: int,
    step: float = 0.5,
    *,
    mu: float | None = None,
    max_halvings: int = 30,
):
    """Gradient descent from zero with monotone line halving.

    Returns the final coil-image iterate and the objective trace (one
    value per accepted iterate, leading with the starting objective).
    Raises :class:`ReconDivergenceError` if the objective still increases
    after ``max_halvings`` step reductions.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if iters < 1:
        raise ValueError("need at least one iteration")
    if step <= 0:
        raise ValueError("step must be positive")
    k = np.asarray(k, dtype=np.complex128)
    if mu is None:
        data_range = float(rss(adjoint(k, mask)).max())
        mu = 1e-6 * max(data_range, 1e-30)

    x = np.zeros_like(k)
    value, grad = tv_value_and_grad(x, k, mask, lam, mu)
    trace = [value]
    for _ in range(iters):
        halvings = 0
        while True:
            candidate = x - step * grad
            cand_value, cand_grad = tv_value_and_grad(candidate, k, mask, lam, mu)
            if cand_value <= value:
                break
            halvings += 1
            if halvings > max_halvings:
                raise ReconDivergenceError(
                    f"objective still increasing after {max_halvings} step halvings"
                )
            step *= 0.5
        x, value, grad = candidate, cand_value, cand_grad
        trace.append(value)
    return x, trace


def tv_reconstruct(
    k,
    mask: UndersamplingMask,
    lam: float,
    iters: int,
    step: float = 0.5,
    *,
    crop_h: int | None = None,
    crop_w: int | None = None,
    mu: float | None = None,
) -> np.ndarray:
    """TV-regularized reconstruction; returns the cropped RSS image."""
    x, _ = tv_minimize(k, mask, lam, iters, step, mu=mu)
    h, w = x.shape[-2:]
    return center_crop(rss(x), crop_h or h, crop_w or w)


def gradient_check(objective, x0, *, n_directions: int = 10, eps: float = 1e-5, rng=None) -> float:
    """Compare the analytic gradient against central finite differences.

    ``objective`` maps a coil stack to (value, gradient).  Random complex
    unit directions probe the directional derivative; the result is the
    worst relative deviation over all probes.
    """
    rng = rng or np.random.default_rng(0)
    x0 = np.asarray(x0, dtype=np.complex128)
    _, grad = objective(x0)
    worst = 0.0
    for _ in range(n_directions):
        v = rng.standard_normal(x0.shape) + 1j * rng.standard_normal(x0.shape)
        v /= np.linalg.norm(v.ravel())
        f_plus, _ = objective(x0 + eps * v)
        f_minus, _ = objective(x0 - eps * v)
        numeric = (f_plus - f_minus) / (2.0 * eps)
        analytic = float(np.sum(grad.real * v.real + grad.imag * v.imag))
        worst = max(worst, abs(numeric - analytic) / max(1.0, abs(numeric)))
    return worst
