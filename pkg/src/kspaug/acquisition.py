"""Measurement physics: sensitivities, noise, masks, and the forward map.

The acquisition of one slice is k_i = F(S_i * object) + z_i per coil,
followed by column undersampling.  ``forward``/``adjoint`` implement the
composite operator and its exact adjoint; ``rss`` is the magnitude
target map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import fft2c, ifft2c
from .grid import ShapeError

__all__ = [
    "NoiseModel",
    "UndersamplingMask",
    "validate_sensitivities",
    "apply_sensitivities",
    "add_noise",
    "round_half_up",
    "center_line_slice",
    "make_random_mask",
    "full_mask",
    "apply_mask",
    "forward",
    "adjoint",
    "rss",
]


@dataclass(frozen=True)
class NoiseModel:
    """Complex Gaussian measurement noise, i.i.d. in real and imaginary parts.

    ``sigma`` is the per-component standard deviation, in the same units
    as the image samples.
    """

    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


@dataclass(frozen=True, eq=False)
class UndersamplingMask:
    """Binary k-space column selector.

    The ``n_center`` lowest-frequency columns around DC are always
    selected; the remaining ones were drawn independently.
    """

    selected: np.ndarray  # bool, shape (width,)
    acceleration: int
    center_fraction: float

    @property
    def width(self) -> int:
        return int(self.selected.shape[0])

    @property
    def n_center(self) -> int:
        return round_half_up(self.width * self.center_fraction)

    def column_indices(self) -> np.ndarray:
        return np.flatnonzero(self.selected)


def round_half_up(x: float) -> int:
    """Deterministic rounding with .5 going up (no banker's rounding)."""
    return int(np.floor(x + 0.5))


def center_line_slice(width: int, n_center: int) -> slice:
    """The ``n_center`` columns centered on DC (DC sits at width // 2)."""
    start = (width - n_center + 1) // 2
    return slice(start, start + n_center)


def validate_sensitivities(maps: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Check shape and the sum-of-squares normalization of coil maps."""
    maps = np.asarray(maps, dtype=np.complex128)
    if maps.ndim != 3 or maps.shape[0] < 1:
        raise ShapeError(f"sensitivity maps must be (coils, H, W), got {maps.shape}")
    ssq = np.sum(maps.real**2 + maps.imag**2, axis=0)
    if np.max(np.abs(ssq - 1.0)) > tol:
        raise ValueError("sensitivity maps are not normalized to unit sum of squares")
    return maps


def apply_sensitivities(obj: np.ndarray, maps: np.ndarray) -> np.ndarray:
    """Modulate an object by each coil map: coil i = S_i * object."""
    obj = np.asarray(obj)
    maps = np.asarray(maps)
    if obj.ndim != 2 or maps.ndim != 3 or maps.shape[1:] != obj.shape:
        raise ShapeError(f"object {obj.shape} does not match maps {maps.shape}")
    return maps * obj[None, :, :]


def add_noise(coils: np.ndarray, noise: "NoiseModel | float", rng: np.random.Generator) -> np.ndarray:
    """Add seeded i.i.d. Gaussian noise to real and imaginary parts."""
    sigma = noise.sigma if isinstance(noise, NoiseModel) else float(noise)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    coils = np.asarray(coils, dtype=np.complex128)
    if sigma == 0.0:
        return coils.copy()
    draws = rng.standard_normal((2,) + coils.shape)
    return coils + sigma * (draws[0] + 1j * draws[1])


def make_random_mask(
    width: int,
    acceleration: int,
    center_fraction: float,
    rng: np.random.Generator,
) -> UndersamplingMask:
    """Random Cartesian column mask.

    The round(width * center_fraction) columns around DC are always on.
    Every other column is selected independently with probability
    p_line = (width/R - n_center) / (width - n_center), which calibrates
    the expected total to the width/R budget.

    Parameters
    ----------
    width : int
        Number of k-space columns.
    acceleration : int
        Acceleration factor R >= 1 (R = 8 keeps 12.5% of lines on average).
    center_fraction : float
        Fraction of always-on low-frequency columns, in (0, 1).
    rng : numpy.random.Generator
        Source for the per-column draws.
    """
    if acceleration < 1:
        raise ValueError("acceleration must be >= 1")
    if not 0.0 < center_fraction < 1.0:
        raise ValueError("center_fraction must lie in (0, 1)")
    n_center = round_half_up(width * center_fraction)
    budget = width / acceleration
    if n_center > budget:
        raise ValueError(
            f"infeasible mask: {n_center} center lines exceed the budget of "
            f"{budget:.2f} lines at acceleration {acceleration}"
        )
    if width > n_center:
        p_line = (budget - n_center) / (width - n_center)
    else:
        p_line = 0.0
    selected = rng.random(width) < p_line
    selected[center_line_slice(width, n_center)] = True
    return UndersamplingMask(selected, int(acceleration), float(center_fraction))


def full_mask(width: int) -> UndersamplingMask:
    """Mask selecting every column (acceleration 1)."""
    return UndersamplingMask(np.ones(width, dtype=bool), 1, 0.5)


def apply_mask(k: np.ndarray, mask: UndersamplingMask) -> np.ndarray:
    """Zero the unselected columns; selected columns pass through bit-identical."""
    k = np.asarray(k)
    if k.shape[-1] != mask.width:
        raise ShapeError(f"k-space width {k.shape[-1]} does not match mask width {mask.width}")
    return np.where(mask.selected, k, np.zeros((), dtype=k.dtype))


def forward(x: np.ndarray, mask: UndersamplingMask) -> np.ndarray:
    """Composite forward operator: coil-wise centered FFT, then masking."""
    return apply_mask(fft2c(x), mask)


def adjoint(k: np.ndarray, mask: UndersamplingMask) -> np.ndarray:
    """Exact adjoint of :func:`forward`: masking, then inverse FFT."""
    return ifft2c(apply_mask(k, mask))


def rss(coils: np.ndarray) -> np.ndarray:
    """Root-sum-of-squares coil combination; non-negative by construction."""
    coils = np.asarray(coils)
    if coils.ndim != 3:
        raise ShapeError(f"expected (coils, H, W), got {coils.shape}")
    return np.sqrt(np.sum(coils.real**2 + coils.imag**2, axis=0))
