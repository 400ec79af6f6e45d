"""Run configuration: flat key-value schema, file/env/flag overrides.

A config file is a flat JSON object.  Unknown keys are rejected by name.
Any key can also be overridden through the environment with the
``KSPAUG_`` prefix (e.g. ``KSPAUG_P_MAX=0.3``); command-line flags win
over both.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .pipeline import AugmentConfig

__all__ = ["ConfigError", "RunConfig", "FIELD_HELP", "load_config", "config_help_text"]

ENV_PREFIX = "KSPAUG_"

MODES = ("mraugment", "naive", "object-level")

# key -> one-line description; every RunConfig field must appear here.
FIELD_HELP = {
    "dataset_dir": "source dataset directory (meta.json plus one raw file per slice)",
    "output_dir": "directory receiving augmented pairs and their manifest",
    "recon_dir": "directory receiving reconstructions",
    "metrics_file": "path of the flat metrics table written by the metrics command",
    "report_file": "path of the noise-validation report (JSON)",
    "seed": "global non-negative seed; every per-slice stream derives from it",
    "mode": "augmentation path: mraugment | naive | object-level",
    "epoch_start": "first training epoch to generate (inclusive)",
    "epoch_end": "last training epoch to generate (inclusive)",
    "workers": "worker pool size; outputs are byte-identical for any value",
    "mask_per_volume": "reuse one fixed mask for all slices of a volume (validation protocol)",
    "p_max": "peak augmentation probability of the schedule",
    "schedule_c": "sharpness of the exponential schedule",
    "total_epochs": "schedule horizon T (p reaches p_max at epoch T)",
    "schedule_kind": "exponential | constant",
    "upsample": "integer upsampling factor applied before interpolating transforms",
    "acceleration": "undersampling acceleration factor R",
    "center_fraction": "fraction of always-sampled low-frequency k-space columns",
    "crop_h": "target crop height",
    "crop_w": "target crop width",
    "weight_hflip": "relative weight of horizontal flips",
    "weight_vflip": "relative weight of vertical flips",
    "weight_rot90": "relative weight of 90-degree rotations",
    "weight_rotate": "relative weight of free rotations",
    "weight_translate": "relative weight of translations",
    "weight_scale_iso": "relative weight of isotropic scaling",
    "weight_scale_aniso": "relative weight of anisotropic scaling",
    "weight_shear": "relative weight of shearing",
    "rot90_k": "inclusive integer range of quarter-turn counts",
    "rotate_deg": "rotation angle range in degrees",
    "translate_x": "horizontal translation range as a fraction of width",
    "translate_y": "vertical translation range as a fraction of height",
    "scale_iso": "isotropic scale factor range",
    "scale_aniso": "per-axis anisotropic scale factor range",
    "shear_deg": "shear angle range in degrees (both axes)",
    "sim_volumes": "simulate: number of volumes",
    "sim_slices": "simulate: slices per volume",
    "sim_height": "simulate: slice height in pixels",
    "sim_width": "simulate: slice width in pixels",
    "sim_coils": "simulate: number of receiver coils",
    "sim_sigma": "simulate: per-component noise standard deviation",
    "recon_input": "dataset or augmented-run directory to reconstruct (empty = dataset_dir)",
    "recon_method": "zero-filled | tv | both",
    "tv_lambda": "total-variation regularization weight",
    "tv_iters": "gradient-descent iterations",
    "tv_step": "initial gradient-descent step size",
}


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


@dataclass
class RunConfig:
    dataset_dir: str = "dataset"
    output_dir: str = "augmented"
    recon_dir: str = "recon"
    metrics_file: str = "metrics.csv"
    report_file: str = "noise_report.json"
    seed: int = 0
    mode: str = "mraugment"
    epoch_start: int = 0
    epoch_end: int = 0
    workers: int = 1
    mask_per_volume: bool = False
    p_max: float = 0.55
    schedule_c: float = 5.0
    total_epochs: int = 50
    schedule_kind: str = "exponential"
    upsample: int = 2
    acceleration: int = 8
    center_fraction: float = 0.04
    crop_h: int = 320
    crop_w: int = 320
    weight_hflip: float = 0.5
    weight_vflip: float = 0.5
    weight_rot90: float = 0.5
    weight_rotate: float = 0.5
    weight_translate: float = 1.0
    weight_scale_iso: float = 0.5
    weight_scale_aniso: float = 0.5
    weight_shear: float = 1.0
    rot90_k: tuple = (0, 3)
    rotate_deg: tuple = (-180.0, 180.0)
    translate_x: tuple = (-0.08, 0.08)
    translate_y: tuple = (-0.125, 0.125)
    scale_iso: tuple = (0.75, 1.25)
    scale_aniso: tuple = (0.75, 1.25)
    shear_deg: tuple = (-12.5, 12.5)
    sim_volumes: int = 2
    sim_slices: int = 2
    sim_height: int = 320
    sim_width: int = 320
    sim_coils: int = 4
    sim_sigma: float = 0.01
    recon_input: str = ""
    recon_method: str = "both"
    tv_lambda: float = 0.003
    tv_iters: int = 80
    tv_step: float = 0.5

    def validate(self) -> "RunConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode: must be one of {', '.join(MODES)} (got {self.mode!r})")
        if self.seed < 0:
            raise ConfigError("seed: must be non-negative")
        if self.epoch_end < self.epoch_start:
            raise ConfigError("epoch_end: must not precede epoch_start")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if self.recon_method not in ("zero-filled", "tv", "both"):
            raise ConfigError(f"recon_method: unknown value {self.recon_method!r}")
        try:
            self.to_augment_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def to_augment_config(self) -> AugmentConfig:
        weights = {
            "hflip": self.weight_hflip,
            "vflip": self.weight_vflip,
            "rot90": self.weight_rot90,
            "rotate": self.weight_rotate,
            "translate": self.weight_translate,
            "scale_iso": self.weight_scale_iso,
            "scale_aniso": self.weight_scale_aniso,
            "shear": self.weight_shear,
        }
        ranges = {
            "rot90": (tuple(self.rot90_k),),
            "rotate": (tuple(self.rotate_deg),),
            "translate": (tuple(self.translate_x), tuple(self.translate_y)),
            "scale_iso": (tuple(self.scale_iso),),
            "scale_aniso": (tuple(self.scale_aniso), tuple(self.scale_aniso)),
            "shear": (tuple(self.shear_deg), tuple(self.shear_deg)),
        }
        return AugmentConfig(
            p_max=self.p_max,
            schedule_c=self.schedule_c,
            total_epochs=self.total_epochs,
            schedule_kind=self.schedule_kind,
            weights=weights,
            ranges=ranges,
            upsample=self.upsample,
            acceleration=self.acceleration,
            center_fraction=self.center_fraction,
            crop_h=self.crop_h,
            crop_w=self.crop_w,
        )

    def epochs(self) -> range:
        return range(self.epoch_start, self.epoch_end + 1)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, value):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, (int, str)):
                raise TypeError
            return int(value)
        if kind == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind == "bool":
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false", "0", "1"):
                return value.lower() in ("true", "1")
            raise TypeError
        if kind == "str":
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind == "tuple":
            seq = json.loads(value) if isinstance(value, str) else value
            if not isinstance(seq, (list, tuple)) or len(seq) != 2:
                raise TypeError
            return tuple(float(v) for v in seq)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r} as {kind}") from exc
    raise ConfigError(f"{key}: unsupported field type {kind}")


def _apply(cfg: RunConfig, updates: dict, source: str) -> None:
    for key, value in updates.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r} (from {source})")
        setattr(cfg, key, _coerce(key, value))


def _env_overrides() -> dict:
    updates = {}
    for key in _FIELD_TYPES:
        env_key = ENV_PREFIX + key.upper()
        if env_key in os.environ:
            raw = os.environ[env_key]
            kind = _FIELD_TYPES[key]
            if kind in ("int", "float"):
                try:
                    updates[key] = int(raw) if kind == "int" else float(raw)
                except ValueError as exc:
                    raise ConfigError(f"{key}: bad environment value {raw!r}") from exc
            else:
                updates[key] = raw
    return updates


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then config file, then environment, then explicit overrides."""
    cfg = RunConfig()
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            obj = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"config file {path} must hold a flat JSON object")
        _apply(cfg, obj, str(path))
    _apply(cfg, _env_overrides(), "environment")
    if overrides:
        _apply(cfg, overrides, "command line")
    return cfg.validate()


def config_help_text() -> str:
    lines = ["configuration keys (flat JSON file; env prefix KSPAUG_):", ""]
    for f in dataclasses.fields(RunConfig):
        default = getattr(RunConfig(), f.name)
        help_line = FIELD_HELP.get(f.name, "")
        lines.append(f"  {f.name:18} {f.type:6} default={default!r}")
        lines.append(f"  {'':18} {help_line}")
    return "\n".join(lines)
