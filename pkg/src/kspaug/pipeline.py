"""The augmentation pipeline: scheduling, sampling, pair generation.

One slice at one epoch turns into a training pair as follows: inverse
FFT to coil images, sample a transform spec from the epoch-dependent
probability p(t), apply it identically to every coil plane, run the
forward model with a fresh undersampling mask, and combine the
augmented coils into a center-cropped RSS target.

Two comparator paths exist alongside the main one:

* ``naive_augment_slice`` augments the real-valued target instead and
  re-synthesizes measurements from it as a zero-phase object.  It is
  the negative control: the RSS magnitude step destroys the complex
  Gaussian noise statistics of the measurements.
* ``object_level_augment`` recombines the object estimate from all
  coils (sum of conj(S_j) x_j), augments that single image, and
  remodulates by the maps.  It demonstrates that augmenting behind the
  coil sensitivities correlates noise across coils.

Randomness is split into role streams (transform firing, transform
parameters, mask) derived from (seed, volume, slice, epoch), so
changing one knob never perturbs unrelated draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    UndersamplingMask,
    apply_mask,
    apply_sensitivities,
    forward,
    make_random_mask,
    rss,
)
from .fourier import fft2c, ifft2c
from .grid import as_coil_stack, center_crop
from .transforms import (
    KIND_ORDER,
    InterpConfig,
    Transform,
    TransformSpec,
    apply_spec,
)

__all__ = [
    "AugmentConfig",
    "AugmentedPair",
    "DEFAULT_WEIGHTS",
    "DEFAULT_RANGES",
    "slice_rngs",
    "volume_mask_rng",
    "augmented_shape",
    "schedule_p",
    "sample_transforms",
    "augment_coil_images",
    "augment_slice",
    "naive_augment_slice",
    "naive_coil_images",
    "object_level_augment",
    "object_coil_images",
    "materialize_pair",
    "materialize_naive_pair",
    "materialize_object_pair",
]

# Published default weights: translation and shearing always eligible,
# the grouped transforms (flips, rotations, scalings) at half weight.
DEFAULT_WEIGHTS = {
    "hflip": 0.5,
    "vflip": 0.5,
    "rot90": 0.5,
    "rotate": 0.5,
    "translate": 1.0,
    "scale_iso": 0.5,
    "scale_aniso": 0.5,
    "shear": 1.0,
}

DEFAULT_RANGES = {
    "rot90": ((0, 3),),
    "rotate": ((-180.0, 180.0),),
    "translate": ((-0.08, 0.08), (-0.125, 0.125)),
    "scale_iso": ((0.75, 1.25),),
    "scale_aniso": ((0.75, 1.25), (0.75, 1.25)),
    "shear": ((-12.5, 12.5), (-12.5, 12.5)),
}

_ROLE_FIRE = 1
_ROLE_PARAM = 2
_ROLE_MASK = 3


@dataclass
class AugmentConfig:
    """Knobs of the augmentation pipeline and its acquisition model."""

    p_max: float = 0.55
    schedule_c: float = 5.0
    total_epochs: int = 50
    schedule_kind: str = "exponential"
    weights: dict = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    ranges: dict = field(default_factory=lambda: {k: tuple(v) for k, v in DEFAULT_RANGES.items()})
    upsample: int = 2
    acceleration: int = 8
    center_fraction: float = 0.04
    crop_h: int = 320
    crop_w: int = 320

    def __post_init__(self):
        if not 0.0 <= self.p_max <= 1.0:
            raise ValueError("p_max must lie in [0, 1]")
        if self.schedule_c <= 0:
            raise ValueError("schedule_c must be positive")
        if self.total_epochs < 1:
            raise ValueError("total_epochs must be >= 1")
        if self.schedule_kind not in ("exponential", "constant"):
            raise ValueError(f"unknown schedule kind {self.schedule_kind!r}")
        for kind, wgt in self.weights.items():
            if kind not in KIND_ORDER:
                raise ValueError(f"unknown transform kind in weights: {kind!r}")
            if not 0.0 <= wgt <= 1.0:
                raise ValueError(f"weight for {kind} must lie in [0, 1]")
        for kind, spans in self.ranges.items():
            if kind not in DEFAULT_RANGES:
                raise ValueError(f"unknown transform kind in ranges: {kind!r}")
            for lo, hi in spans:
                if hi < lo:
                    raise ValueError(f"empty parameter range for {kind}: ({lo}, {hi})")
        if int(self.upsample) < 1:
            raise ValueError("upsample must be >= 1")
        if self.acceleration < 1:
            raise ValueError("acceleration must be >= 1")
        if not 0.0 < self.center_fraction < 1.0:
            raise ValueError("center_fraction must lie in (0, 1)")
        if self.crop_h < 1 or self.crop_w < 1:
            raise ValueError("crop size must be positive")

    def interp(self) -> InterpConfig:
        return InterpConfig(self.upsample)


@dataclass
class AugmentedPair:
    """One generated training example."""

    kspace: np.ndarray  # undersampled augmented k-space, (coils, H, W)
    target: np.ndarray  # cropped RSS of the augmented coil images
    spec: TransformSpec
    mask: UndersamplingMask


def _entropy_tuple(rng) -> tuple:
    if isinstance(rng, np.random.SeedSequence):
        ent = rng.entropy
        return tuple(int(e) for e in ent) if isinstance(ent, (list, tuple)) else (int(ent),)
    return (int(rng),)


def slice_rngs(rng, volume_id: int, slice_id: int, epoch: int):
    """Role-separated generators (firing, parameters, mask) for one slice.

    ``rng`` is an integer seed or a SeedSequence; every stream is a pure
    function of (seed, volume, slice, epoch, role).
    """
    base = _entropy_tuple(rng)

    def child(role: int) -> np.random.Generator:
        seq = np.random.SeedSequence([*base, int(volume_id), int(slice_id), int(epoch), role])
        return np.random.default_rng(seq)

    return child(_ROLE_FIRE), child(_ROLE_PARAM), child(_ROLE_MASK)


def volume_mask_rng(rng, volume_id: int) -> np.random.Generator:
    """Mask stream keyed by volume only: one fixed mask per volume."""
    base = _entropy_tuple(rng)
    return np.random.default_rng(np.random.SeedSequence([*base, int(volume_id), _ROLE_MASK]))


def schedule_p(t: float, cfg: AugmentConfig) -> float:
    """Augmentation probability at epoch t.

    Exponential schedule: p(t) = p_max * (1 - exp(-t*c/T)) / (1 - exp(-c)),
    so p(0) = 0 and p(T) = p_max exactly; t beyond T clamps to T.
    The constant schedule returns p_max for every epoch.
    """
    if t < 0:
        raise ValueError("epoch must be non-negative")
    if cfg.schedule_kind == "constant":
        return cfg.p_max
    big_t = float(cfg.total_epochs)
    tt = min(float(t), big_t)
    if tt >= big_t:
        return cfg.p_max
    c = cfg.schedule_c
    return cfg.p_max * (1.0 - math.exp(-tt * c / big_t)) / (1.0 - math.exp(-c))


def _draw_params(kind: str, ranges: dict, rng: np.random.Generator) -> tuple:
    spans = ranges.get(kind, DEFAULT_RANGES.get(kind, ()))
    if kind == "rot90":
        lo, hi = spans[0]
        return (int(rng.integers(int(lo), int(hi) + 1)),)
    return tuple(float(rng.uniform(lo, hi)) for lo, hi in spans)


def sample_transforms(
    cfg: AugmentConfig,
    p: float,
    rng: np.random.Generator,
    *,
    param_rng: np.random.Generator | None = None,
    volume_id: int = 0,
    slice_id: int = 0,
    epoch: int = 0,
) -> TransformSpec:
    """Draw a resolved spec: kind i fires independently with probability p * w_i.

    Parameters are drawn for every kind regardless of firing (and used
    only when it fired), so toggling one weight leaves all other draws
    aligned.  With one generator for both roles the sampling is still
    fully deterministic.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if param_rng is None:
        param_rng = rng
    chosen = []
    for kind in KIND_ORDER:
        u = rng.random()
        params = _draw_params(kind, cfg.ranges, param_rng)
        if u < p * cfg.weights.get(kind, 0.0):
            chosen.append(Transform(kind, params))
    return TransformSpec(
        transforms=tuple(chosen),
        volume_id=volume_id,
        slice_id=slice_id,
        epoch=epoch,
        p=float(p),
    )


def _sample_for_slice(cfg, epoch, rng, volume_id, slice_id):
    fire, param, mask_stream = slice_rngs(rng, volume_id, slice_id, epoch)
    p = schedule_p(epoch, cfg)
    spec = sample_transforms(
        cfg, p, fire, param_rng=param, volume_id=volume_id, slice_id=slice_id, epoch=epoch
    )
    return spec, mask_stream


def _check_maps(maps, k):
    if maps is None:
        raise ValueError("this augmentation path requires known sensitivity maps")
    maps = np.asarray(maps, dtype=np.complex128)
    if maps.shape != k.shape:
        raise ValueError(f"maps shape {maps.shape} does not match k-space {k.shape}")
    return maps


def augmented_shape(spec: TransformSpec, h: int, w: int) -> tuple:
    """Grid shape after the spec (odd quarter-turns swap the axes)."""
    for t in spec.transforms:
        if t.kind == "rot90" and int(t.params[0]) % 2 == 1:
            h, w = w, h
    return h, w


def materialize_pair(k, spec: TransformSpec, mask: UndersamplingMask, crop_h, crop_w, interp=None) -> AugmentedPair:
    """Deterministically build a pair from an already-resolved spec and mask.

    With an empty spec the stored k-space is reused directly (no FFT
    round trip), so a disabled pipeline with a full mask reproduces the
    input measurement bit-exactly.
    """
    k = as_coil_stack(k)
    x = ifft2c(k)
    if spec.transforms:
        x_a = apply_spec(x, spec, interp)
        k_full = fft2c(x_a)
    else:
        x_a = x
        k_full = k
    target = center_crop(rss(x_a), crop_h, crop_w)
    return AugmentedPair(kspace=apply_mask(k_full, mask), target=target, spec=spec, mask=mask)


def naive_coil_images(k, maps, spec: TransformSpec, crop_h, crop_w, interp=None):
    """Coil images of the naive path: augmented real target times maps."""
    k = as_coil_stack(k)
    maps = _check_maps(maps, k)
    xbar = center_crop(rss(ifft2c(k)), crop_h, crop_w)
    xbar_a = apply_spec(xbar, spec, interp) if spec.transforms else xbar
    coils = apply_sensitivities(xbar_a.astype(np.complex128), center_crop(maps, *xbar_a.shape))
    return coils, xbar_a


def materialize_naive_pair(k, maps, spec, mask: UndersamplingMask, crop_h, crop_w, interp=None) -> AugmentedPair:
    coils, xbar_a = naive_coil_images(k, maps, spec, crop_h, crop_w, interp)
    return AugmentedPair(kspace=forward(coils, mask), target=xbar_a, spec=spec, mask=mask)


def object_coil_images(k, maps, spec: TransformSpec, interp=None) -> np.ndarray:
    """Coil images of the object-level path: S_i times the augmented object."""
    k = as_coil_stack(k)
    maps = _check_maps(maps, k)
    x = ifft2c(k)
    obj = np.sum(np.conj(maps) * x, axis=0)
    obj_a = apply_spec(obj, spec, interp) if spec.transforms else obj
    if obj_a.shape != obj.shape:
        raise ValueError("shape-changing transforms are incompatible with object-level remodulation")
    return maps * obj_a[None, :, :]


def materialize_object_pair(k, maps, spec, mask: UndersamplingMask, crop_h, crop_w, interp=None) -> AugmentedPair:
    coils = object_coil_images(k, maps, spec, interp)
    return AugmentedPair(
        kspace=forward(coils, mask),
        target=center_crop(rss(coils), crop_h, crop_w),
        spec=spec,
        mask=mask,
    )


def augment_coil_images(k, cfg: AugmentConfig, epoch: int, rng, *, volume_id: int = 0, slice_id: int = 0):
    """Sample a spec and return (augmented coil images, spec) for one slice."""
    k = as_coil_stack(k)
    spec, _ = _sample_for_slice(cfg, epoch, rng, volume_id, slice_id)
    x = ifft2c(k)
    x_a = apply_spec(x, spec, cfg.interp()) if spec.transforms else x
    return x_a, spec


def augment_slice(
    k,
    cfg: AugmentConfig,
    epoch: int,
    rng,
    *,
    volume_id: int = 0,
    slice_id: int = 0,
    mask_rng: np.random.Generator | None = None,
) -> AugmentedPair:
    """Generate one augmented (undersampled k-space, target) pair.

    ``mask_rng`` overrides the derived mask stream, e.g. to share one
    mask across all slices of a volume; transform sampling is untouched
    by that choice.
    """
    k = as_coil_stack(k)
    spec, mask_stream = _sample_for_slice(cfg, epoch, rng, volume_id, slice_id)
    mask = make_random_mask(
        augmented_shape(spec, *k.shape[-2:])[1],
        cfg.acceleration,
        cfg.center_fraction,
        mask_stream if mask_rng is None else mask_rng,
    )
    return materialize_pair(k, spec, mask, cfg.crop_h, cfg.crop_w, cfg.interp())


def naive_augment_slice(
    k,
    cfg: AugmentConfig,
    epoch: int,
    rng,
    maps,
    *,
    volume_id: int = 0,
    slice_id: int = 0,
    mask_rng: np.random.Generator | None = None,
) -> AugmentedPair:
    """Negative control: augment the real target, re-synthesize measurements.

    The real-valued RSS target is computed first, the sampled transforms
    are applied to it, and the augmented real image is treated as a
    zero-phase object modulated by the (center-cropped) maps.  The
    magnitude step discards noise phase and rectifies the noise, so the
    re-synthesized measurements no longer carry i.i.d. complex Gaussian
    noise.  Matched seeds give the same spec as :func:`augment_slice`.
    """
    k = as_coil_stack(k)
    maps = _check_maps(maps, k)
    spec, mask_stream = _sample_for_slice(cfg, epoch, rng, volume_id, slice_id)
    mask = make_random_mask(
        augmented_shape(spec, cfg.crop_h, cfg.crop_w)[1],
        cfg.acceleration,
        cfg.center_fraction,
        mask_stream if mask_rng is None else mask_rng,
    )
    return materialize_naive_pair(k, maps, spec, mask, cfg.crop_h, cfg.crop_w, cfg.interp())


def object_level_augment(
    k,
    maps,
    cfg: AugmentConfig,
    epoch: int,
    rng,
    *,
    volume_id: int = 0,
    slice_id: int = 0,
) -> np.ndarray:
    """Augment the recombined object estimate instead of the coil images.

    The object is recovered as sum_j conj(S_j) x_j (exact for maps
    normalized to unit sum of squares), transformed once, and modulated
    back by each map.  The shared transformed noise term makes the
    per-coil noise correlated, which :func:`augment_coil_images` avoids.
    Returns the augmented coil-image stack.
    """
    k = as_coil_stack(k)
    maps = _check_maps(maps, k)
    spec, _ = _sample_for_slice(cfg, epoch, rng, volume_id, slice_id)
    return object_coil_images(k, maps, spec, cfg.interp())
