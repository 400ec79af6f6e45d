"""kspaug: accelerated-MRI simulation and noise-faithful k-space augmentation.

The package simulates the multi-coil Cartesian acquisition model
(coil sensitivities, centered Fourier transform, complex Gaussian
noise, column undersampling), augments training pairs in a way that
provably preserves the measurement noise statistics, and ships the
validators and classical reconstructors needed to check all of it at
desk scale.
"""

from .acquisition import (
    NoiseModel,
    UndersamplingMask,
    add_noise,
    adjoint,
    apply_mask,
    apply_sensitivities,
    forward,
    full_mask,
    make_random_mask,
    rss,
    validate_sensitivities,
)
from .fourier import fft2c, ifft2c
from .grid import ShapeError, add, center_crop, elementwise_abs, l2_norm, scale
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import (
    CovarianceReport,
    NoiseReport,
    cross_coil_covariance,
    nmse,
    psnr,
    ssim,
    validate_noise,
)
from .phantom import shepp_logan, synth_dataset, synth_sensitivities
from .pipeline import (
    AugmentConfig,
    AugmentedPair,
    augment_coil_images,
    augment_slice,
    naive_augment_slice,
    object_level_augment,
    sample_transforms,
    schedule_p,
)
from .recon import gradient_check, tv_reconstruct, zero_filled
from .transforms import (
    InterpConfig,
    Transform,
    TransformSpec,
    apply_affine,
    apply_pixel_preserving,
    apply_spec,
    compose,
    hflip,
    rot90,
    rotate,
    scale_aniso,
    scale_iso,
    shear,
    translate,
    vflip,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "AugmentedPair",
    "CovarianceReport",
    "InterpConfig",
    "KERNEL_BACKEND",
    "NoiseModel",
    "NoiseReport",
    "ShapeError",
    "Transform",
    "TransformSpec",
    "UndersamplingMask",
    "add",
    "add_noise",
    "adjoint",
    "apply_affine",
    "apply_mask",
    "apply_pixel_preserving",
    "apply_sensitivities",
    "apply_spec",
    "augment_coil_images",
    "augment_slice",
    "center_crop",
    "compose",
    "cross_coil_covariance",
    "elementwise_abs",
    "fft2c",
    "forward",
    "full_mask",
    "gradient_check",
    "hflip",
    "ifft2c",
    "l2_norm",
    "make_random_mask",
    "naive_augment_slice",
    "nmse",
    "object_level_augment",
    "psnr",
    "rot90",
    "rotate",
    "rss",
    "sample_transforms",
    "scale",
    "scale_aniso",
    "scale_iso",
    "schedule_p",
    "shear",
    "shepp_logan",
    "ssim",
    "synth_dataset",
    "synth_sensitivities",
    "translate",
    "tv_reconstruct",
    "validate_noise",
    "validate_sensitivities",
    "vflip",
    "zero_filled",
    "__version__",
]
