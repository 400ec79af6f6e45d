"""Synthetic ground truth: ellipse phantoms, coil maps, and seeded datasets.

Everything here is a pure function of its seed, so any consumer (tests,
the noise validator, the CLI) can regenerate the exact noise-free twin
of a stored slice from the dataset metadata alone.
"""

from __future__ import annotations

import math

import numpy as np

from .acquisition import add_noise, apply_sensitivities
from .fourier import fft2c

__all__ = [
    "shepp_logan",
    "synth_sensitivities",
    "slice_object",
    "volume_maps",
    "clean_slice_kspace",
    "noisy_slice_kspace",
    "synth_dataset",
]

# (x0, y0, half-axis a, half-axis b, angle deg); classic head-phantom geometry.
_ELLIPSES = (
    (0.0, 0.0, 0.69, 0.92, 0.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0),
    (0.22, 0.0, 0.11, 0.31, -18.0),
    (-0.22, 0.0, 0.16, 0.41, 18.0),
    (0.0, 0.35, 0.21, 0.25, 0.0),
    (0.0, 0.1, 0.046, 0.046, 0.0),
    (0.0, -0.1, 0.046, 0.046, 0.0),
    (-0.08, -0.605, 0.046, 0.023, 0.0),
    (0.0, -0.605, 0.023, 0.023, 0.0),
    (0.06, -0.605, 0.023, 0.046, 0.0),
)

_INTENSITIES = {
    "modified": (1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1),
    "classic": (1.0, -0.98, -0.02, -0.02, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01),
}

# Axis-aligned ellipses centered on x = 0 only, so the rendered grid is
# left-right symmetric down to the last bit.
_SYMMETRIC_INDICES = (0, 1, 4, 5, 6, 8)

# Seed-stream roles for dataset generation.
_ROLE_MAPS = 11
_ROLE_JITTER = 12
_ROLE_NOISE = 13


def _coords(h: int, w: int):
    # (i - center) * step is exactly sign-symmetric, unlike linspace.
    y = (np.arange(h, dtype=np.float64) - (h - 1) / 2.0) * (2.0 / (h - 1))
    x = (np.arange(w, dtype=np.float64) - (w - 1) / 2.0) * (2.0 / (w - 1))
    return y[:, None], x[None, :]


def _render(h, w, ellipses, values, rot_deg=0.0, shift=(0.0, 0.0), scale=1.0):
    yy, xx = _coords(h, w)
    th = math.radians(rot_deg)
    xs = (math.cos(th) * (xx - shift[0]) + math.sin(th) * (yy - shift[1])) / scale
    ys = (-math.sin(th) * (xx - shift[0]) + math.cos(th) * (yy - shift[1])) / scale
    img = np.zeros((h, w))
    for (x0, y0, a, b, phi), val in zip(ellipses, values):
        ph = math.radians(phi)
        u = (xs - x0) * math.cos(ph) + (ys - y0) * math.sin(ph)
        v = (xs - x0) * math.sin(ph) - (ys - y0) * math.cos(ph)
        img += val * ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0)
    return np.clip(img, 0.0, 1.0)


def shepp_logan(h: int, w: int, contrast_variant: str = "modified") -> np.ndarray:
    """Ellipse-sum head phantom with values clamped to [0, 1].

    Variants: ``modified`` (high-contrast intensities), ``classic``
    (original low-contrast intensities), and ``symmetric`` (the
    axis-aligned subset, exactly mirror-symmetric left to right).
    """
    if h < 32 or w < 32:
        raise ValueError(f"phantom size must be at least 32x32, got {h}x{w}")
    if contrast_variant == "symmetric":
        ellipses = [_ELLIPSES[i] for i in _SYMMETRIC_INDICES]
        values = [_INTENSITIES["modified"][i] for i in _SYMMETRIC_INDICES]
    elif contrast_variant in _INTENSITIES:
        ellipses = _ELLIPSES
        values = _INTENSITIES[contrast_variant]
    else:
        raise ValueError(f"unknown contrast variant {contrast_variant!r}")
    return _render(h, w, ellipses, values)


def synth_sensitivities(h: int, w: int, n_coils: int, rng: np.random.Generator) -> np.ndarray:
    """Smooth synthetic coil maps with sum of squared moduli equal to 1.

    Each coil is a broad Gaussian magnitude bump centered at an
    equiangular border position, carrying a gentle linear phase ramp.
    The pixelwise normalization makes the RSS of the maps exactly one.
    """
    if n_coils < 1:
        raise ValueError("need at least one coil")
    yy, xx = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    radius = 0.5 * min(h, w)
    bump_width = 0.85 * max(h, w)
    raw = np.empty((n_coils, h, w), dtype=np.complex128)
    for i in range(n_coils):
        ang = 2.0 * math.pi * i / n_coils + rng.uniform(-0.1, 0.1)
        by = cy + radius * math.sin(ang)
        bx = cx + radius * math.cos(ang)
        mag = np.exp(-((xx - bx) ** 2 + (yy - by) ** 2) / (2.0 * bump_width**2))
        sx, sy = rng.uniform(-1.5, 1.5, size=2)
        phase = math.pi * (sx * (xx - cx) / w + sy * (yy - cy) / h) + rng.uniform(-math.pi, math.pi)
        raw[i] = mag * np.exp(1j * phase)
    norm = np.sqrt(np.sum(raw.real**2 + raw.imag**2, axis=0))
    return raw / norm


def _child_rng(seed: int, role: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), role, *map(int, keys)]))


def volume_maps(h: int, w: int, n_coils: int, seed: int, volume: int) -> np.ndarray:
    """Coil maps of one volume (shared by all of its slices)."""
    return synth_sensitivities(h, w, n_coils, _child_rng(seed, _ROLE_MAPS, volume))


def slice_object(h: int, w: int, seed: int, volume: int, slice_idx: int) -> np.ndarray:
    """Affine-jittered phantom for one slice (rotation, shift, zoom)."""
    rng = _child_rng(seed, _ROLE_JITTER, volume, slice_idx)
    rot = rng.uniform(-10.0, 10.0)
    shift = rng.uniform(-0.04, 0.04, size=2)
    zoom = rng.uniform(0.95, 1.05)
    values = _INTENSITIES["modified"]
    return _render(h, w, _ELLIPSES, values, rot_deg=rot, shift=tuple(shift), scale=zoom)


def clean_slice_kspace(h, w, n_coils, seed, volume, slice_idx) -> np.ndarray:
    """Noise-free fully-sampled k-space of one synthetic slice."""
    obj = slice_object(h, w, seed, volume, slice_idx)
    maps = volume_maps(h, w, n_coils, seed, volume)
    return fft2c(apply_sensitivities(obj.astype(np.complex128), maps))


def noisy_slice_kspace(h, w, n_coils, sigma, seed, volume, slice_idx) -> np.ndarray:
    """The stored measurement: clean k-space plus seeded complex noise."""
    k = clean_slice_kspace(h, w, n_coils, seed, volume, slice_idx)
    return add_noise(k, sigma, _child_rng(seed, _ROLE_NOISE, volume, slice_idx))


def synth_dataset(
    out_dir,
    n_volumes: int,
    slices_per_volume: int,
    h: int,
    w: int,
    n_coils: int,
    sigma: float,
    seed: int,
):
    """Write a fully reproducible synthetic dataset to ``out_dir``.

    Per slice: jittered phantom -> coil modulation -> centered FFT ->
    seeded noise -> raw float32 file.  Rerunning with the same seed
    produces byte-identical files.
    """
    from pathlib import Path

    from . import dataio

    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    meta = dataio.DatasetMeta(
        volumes=int(n_volumes),
        slices_per_volume=int(slices_per_volume),
        height=int(h),
        width=int(w),
        coils=int(n_coils),
        sigma=float(sigma),
        seed=int(seed),
    )
    for v, s in meta.slice_ids():
        k = noisy_slice_kspace(h, w, n_coils, sigma, seed, v, s)
        dataio.write_complex(root / dataio.slice_filename(v, s), k)
    meta.save(root)
    return meta
