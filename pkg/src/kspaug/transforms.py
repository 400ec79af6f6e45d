"""Image-domain augmentations applied identically to every coil plane.

Two families, with very different numerics:

* pixel-preserving: horizontal/vertical flips, 90-degree rotations and
  integer circular translations.  These permute samples exactly, so any
  per-sample statistic of the input (noise included) is literally
  unchanged.
* interpolating affine: free rotations, fractional translations,
  isotropic/anisotropic scaling and shearing.  These are applied as one
  composed warp per run of consecutive affine transforms: upsample,
  bicubic warp with mirrored boundaries, downsample.  The same real
  coefficients act on the real and imaginary planes of every coil.

Angles are degrees, translations are fractions of width/height, and
scale factors > 1 zoom in.  Positive rotation turns content
counter-clockwise with row 0 displayed on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .kernels import resize_bicubic, warp_bicubic

__all__ = [
    "PIXEL_KINDS",
    "AFFINE_KINDS",
    "KIND_ORDER",
    "Transform",
    "TransformSpec",
    "InterpConfig",
    "DegenerateTransformError",
    "hflip",
    "vflip",
    "rot90",
    "rotate",
    "translate",
    "scale_iso",
    "scale_aniso",
    "shear",
    "is_pixel_preserving",
    "apply_pixel_preserving",
    "apply_affine",
    "apply_spec",
    "compose",
]

PIXEL_KINDS = ("hflip", "vflip", "rot90")
AFFINE_KINDS = ("rotate", "translate", "scale_iso", "scale_aniso", "shear")
# Sampling and application order of the pipeline: exact permutations
# first, then the transforms that share one interpolating warp.
KIND_ORDER = ("hflip", "vflip", "rot90", "rotate", "translate", "scale_iso", "scale_aniso", "shear")

_PARAM_COUNT = {
    "hflip": 0,
    "vflip": 0,
    "rot90": 1,
    "rotate": 1,
    "translate": 2,
    "scale_iso": 1,
    "scale_aniso": 2,
    "shear": 2,
}

# Integer-pixel tolerance when deciding whether a translation permutes.
_INT_EPS = 1e-9


class DegenerateTransformError(ValueError):
    """Composed affine matrix is (numerically) singular."""


@dataclass(frozen=True)
class Transform:
    """One resolved augmentation: a kind plus its sampled parameters."""

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KIND_ORDER:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if len(params) != _PARAM_COUNT[self.kind]:
            raise ValueError(
                f"{self.kind} takes {_PARAM_COUNT[self.kind]} parameter(s), got {len(params)}"
            )
        object.__setattr__(self, "params", params)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_json(cls, obj: dict) -> "Transform":
        return cls(obj["kind"], tuple(obj.get("params", ())))


def hflip() -> Transform:
    return Transform("hflip")


def vflip() -> Transform:
    return Transform("vflip")


def rot90(k: int) -> Transform:
    return Transform("rot90", (int(k) % 4,))


def rotate(angle_deg: float) -> Transform:
    return Transform("rotate", (angle_deg,))


def translate(dx_frac: float, dy_frac: float) -> Transform:
    """Shift content by dx (fraction of width) and dy (fraction of height)."""
    return Transform("translate", (dx_frac, dy_frac))


def scale_iso(s: float) -> Transform:
    return Transform("scale_iso", (s,))


def scale_aniso(sx: float, sy: float) -> Transform:
    return Transform("scale_aniso", (sx, sy))


def shear(x_deg: float, y_deg: float) -> Transform:
    return Transform("shear", (x_deg, y_deg))


@dataclass(frozen=True)
class TransformSpec:
    """Resolved per-slice augmentation record.

    The transform order is the application order, and the record alone
    replays the augmentation bit-exactly.
    """

    transforms: tuple = ()
    volume_id: int = 0
    slice_id: int = 0
    epoch: int = 0
    p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "transforms", tuple(self.transforms))

    def to_json(self) -> dict:
        return {
            "volume": self.volume_id,
            "slice": self.slice_id,
            "epoch": self.epoch,
            "p": self.p,
            "transforms": [t.to_json() for t in self.transforms],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TransformSpec":
        return cls(
            transforms=tuple(Transform.from_json(t) for t in obj["transforms"]),
            volume_id=int(obj["volume"]),
            slice_id=int(obj["slice"]),
            epoch=int(obj["epoch"]),
            p=float(obj["p"]),
        )


@dataclass(frozen=True)
class InterpConfig:
    """Interpolation settings for the affine path.

    ``upsample`` is the integer factor applied before any warp that needs
    resampling; the result is downsampled back afterwards.
    """

    upsample: int = 2

    def __post_init__(self):
        if int(self.upsample) < 1:
            raise ValueError("upsample factor must be >= 1")
        object.__setattr__(self, "upsample", int(self.upsample))


def _pixel_shifts(t: Transform, shape) -> tuple:
    """(dy, dx) in pixels for a translate on a grid of the given shape."""
    h, w = shape[-2:]
    dx = t.params[0] * w
    dy = t.params[1] * h
    return dy, dx


def is_pixel_preserving(t: Transform, shape) -> bool:
    """True when the transform permutes the samples of this grid exactly."""
    if t.kind in PIXEL_KINDS:
        return True
    if t.kind == "translate":
        dy, dx = _pixel_shifts(t, shape)
        return abs(dx - round(dx)) < _INT_EPS and abs(dy - round(dy)) < _INT_EPS
    return False


def apply_pixel_preserving(stack: np.ndarray, t: Transform, interp: InterpConfig | None = None):
    """Apply an exact permutation transform to the trailing two axes.

    A translation whose pixel shift is not integral is routed to the
    affine path (using ``interp`` or its defaults).
    """
    a = np.asarray(stack)
    if t.kind == "hflip":
        return np.flip(a, axis=-1).copy()
    if t.kind == "vflip":
        return np.flip(a, axis=-2).copy()
    if t.kind == "rot90":
        return np.rot90(a, int(t.params[0]), axes=(-2, -1)).copy()
    if t.kind == "translate":
        dy, dx = _pixel_shifts(t, a.shape)
        if abs(dx - round(dx)) < _INT_EPS and abs(dy - round(dy)) < _INT_EPS:
            return np.roll(a, (int(round(dy)), int(round(dx))), axis=(-2, -1))
        return apply_affine(a, t, interp or InterpConfig())
    raise ValueError(f"{t.kind} is not a pixel-preserving transform")


def _matrix(t: Transform, h: int, w: int) -> np.ndarray:
    """Forward 3x3 content map in (x=col, y=row) homogeneous coordinates."""
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    if t.kind == "translate":
        dx = t.params[0] * w
        dy = t.params[1] * h
        return np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])
    if t.kind == "rotate":
        th = math.radians(t.params[0])
        lin = np.array([[math.cos(th), math.sin(th)], [-math.sin(th), math.cos(th)]])
    elif t.kind == "scale_iso":
        s = t.params[0]
        lin = np.array([[s, 0.0], [0.0, s]])
    elif t.kind == "scale_aniso":
        sx, sy = t.params
        lin = np.array([[sx, 0.0], [0.0, sy]])
    elif t.kind == "shear":
        tx = math.tan(math.radians(t.params[0]))
        ty = math.tan(math.radians(t.params[1]))
        lin = np.array([[1.0, tx], [ty, 1.0]])
    else:
        raise ValueError(f"{t.kind} has no affine matrix")
    m = np.eye(3)
    m[:2, :2] = lin
    # conjugate about the image center
    m[0, 2] = cx - lin[0, 0] * cx - lin[0, 1] * cy
    m[1, 2] = cy - lin[1, 0] * cx - lin[1, 1] * cy
    return m


def _split_planes(stack: np.ndarray):
    """View a grid/stack as float64 planes plus a function undoing the split."""
    arr = np.asarray(stack)
    squeeze = arr.ndim == 2
    s3 = arr[None] if squeeze else arr
    if s3.ndim != 3:
        raise ValueError(f"expected a 2D grid or (coils, H, W) stack, got shape {arr.shape}")
    if np.iscomplexobj(s3):
        n = s3.shape[0]
        planes = np.concatenate(
            [np.ascontiguousarray(s3.real), np.ascontiguousarray(s3.imag)], axis=0
        )

        def assemble(p):
            out = p[:n] + 1j * p[n:]
            return out[0] if squeeze else out

    else:
        planes = np.ascontiguousarray(s3, dtype=np.float64)

        def assemble(p):
            return p[0] if squeeze else p

    return planes, assemble


def _warp_stack(stack: np.ndarray, transforms: Sequence[Transform], interp: InterpConfig):
    """One composed warp for a run of affine transforms, in list order."""
    h, w = stack.shape[-2:]
    fwd = np.eye(3)
    for t in transforms:
        fwd = _matrix(t, h, w) @ fwd
    if abs(fwd[0, 0] * fwd[1, 1] - fwd[0, 1] * fwd[1, 0]) < 1e-8:
        raise DegenerateTransformError("composed affine matrix is singular")
    if np.array_equal(fwd, np.eye(3)):
        return stack

    u = interp.upsample
    if u > 1:
        up = np.diag([float(u), float(u), 1.0])
        fwd = up @ fwd @ np.linalg.inv(up)
    inv = np.linalg.inv(fwd)
    # (x, y) matrix -> (row, col) sampling coefficients
    coeffs = (inv[1, 1], inv[1, 0], inv[1, 2], inv[0, 1], inv[0, 0], inv[0, 2])

    planes, assemble = _split_planes(stack)
    if u > 1:
        planes = resize_bicubic(planes, u * h, u * w)
    planes = warp_bicubic(planes, coeffs)
    if u > 1:
        planes = resize_bicubic(planes, h, w)
    return assemble(planes)


def apply_affine(stack: np.ndarray, t: Transform, interp: InterpConfig | None = None):
    """Apply a single interpolating transform (upsample, warp, downsample)."""
    if t.kind in PIXEL_KINDS:
        raise ValueError(f"{t.kind} is pixel-preserving; use apply_pixel_preserving")
    return _warp_stack(np.asarray(stack), [t], interp or InterpConfig())


def apply_spec(stack: np.ndarray, spec: TransformSpec, interp: InterpConfig | None = None):
    """Apply a resolved spec in order.

    Permutation transforms are applied exactly; each run of consecutive
    interpolating transforms is composed into a single warp so the data
    is resampled at most once per run.  An empty spec returns the input
    unchanged.
    """
    interp = interp or InterpConfig()
    out = np.asarray(stack)
    pending: list[Transform] = []
    for t in spec.transforms:
        if is_pixel_preserving(t, out.shape):
            if pending:
                out = _warp_stack(out, pending, interp)
                pending = []
            out = apply_pixel_preserving(out, t)
        else:
            pending.append(t)
    if pending:
        out = _warp_stack(out, pending, interp)
    return out


def compose(spec: TransformSpec, interp: InterpConfig | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """Bind a spec into a reusable stack -> stack application."""
    return partial(apply_spec, spec=spec, interp=interp)
