"""On-disk formats: dataset/run metadata, raw slice files, manifests.

A dataset directory holds ``meta.json`` plus one headerless file per
slice: little-endian float32 (re, im) pairs, coil-major then row-major,
i.e. exactly coils*H*W complex64 values.  Real-valued images (targets,
reconstructions) use the same scheme with plain float32 samples.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DatasetMeta",
    "slice_filename",
    "write_complex",
    "read_complex",
    "write_real",
    "read_real",
    "write_json",
    "read_json",
    "write_manifest",
    "read_manifest",
]

META_NAME = "meta.json"
MANIFEST_NAME = "manifest.jsonl"

_KDTYPE = np.dtype("<c8")
_RDTYPE = np.dtype("<f4")


@dataclass(frozen=True)
class DatasetMeta:
    """Everything needed to read a dataset back or regenerate it from seed."""

    volumes: int
    slices_per_volume: int
    height: int
    width: int
    coils: int
    sigma: float
    seed: int
    kind: str = "phantom-dataset"

    def save(self, root: Path) -> None:
        write_json(Path(root) / META_NAME, asdict(self))

    @classmethod
    def load(cls, root: Path) -> "DatasetMeta":
        obj = read_json(Path(root) / META_NAME)
        return cls(**obj)

    def slice_ids(self):
        for v in range(self.volumes):
            for s in range(self.slices_per_volume):
                yield v, s


def slice_filename(volume: int, slice_idx: int) -> str:
    return f"vol{volume:04d}_sl{slice_idx:03d}.kspace"


def write_complex(path: Path, arr: np.ndarray) -> None:
    Path(path).write_bytes(np.ascontiguousarray(arr).astype(_KDTYPE).tobytes())


def read_complex(path: Path, coils: int, height: int, width: int) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype=_KDTYPE)
    expected = coils * height * width
    if raw.size != expected:
        raise ValueError(f"{path}: expected {expected} complex samples, found {raw.size}")
    return raw.reshape(coils, height, width).astype(np.complex128)


def write_real(path: Path, arr: np.ndarray) -> None:
    Path(path).write_bytes(np.ascontiguousarray(arr).astype(_RDTYPE).tobytes())


def read_real(path: Path, height: int, width: int) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype=_RDTYPE)
    if raw.size != height * width:
        raise ValueError(f"{path}: expected {height * width} samples, found {raw.size}")
    return raw.reshape(height, width).astype(np.float64)


def write_json(path: Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path: Path):
    return json.loads(Path(path).read_text())


def write_manifest(path: Path, records: list[dict]) -> None:
    lines = [json.dumps(r, sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_manifest(path: Path) -> list[dict]:
    text = Path(path).read_text()
    return [json.loads(line) for line in text.splitlines() if line.strip()]
