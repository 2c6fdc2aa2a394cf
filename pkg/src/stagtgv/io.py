"""PNG reading/writing, seeded noise and JSON run reports."""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import png

from . import __version__
from .grid import GridImage, GridKind, expect_kind

REPORT_SCHEMA = 1
NOISE_GENERATOR = "numpy.random.default_rng (PCG64), standard_normal (ziggurat)"


class ImageFormatError(ValueError):
    pass


def load_png(path) -> GridImage:
    """Read an 8- or 16-bit grayscale or RGB PNG, scaled to [0, 1].

    Palette images are expanded to RGB. Images with an alpha channel are
    rejected.
    """
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        arr = np.vstack([np.asarray(r, dtype=np.float64) for r in rows])
    except (png.FormatError, png.ChunkError) as exc:
        raise ImageFormatError(f"{path}: not a readable PNG ({exc})") from exc
    if info.get("alpha"):
        raise ImageFormatError(f"{path}: images with an alpha channel are not supported")
    planes = info["planes"]
    if planes not in (1, 3):
        raise ImageFormatError(f"{path}: unsupported colour type with {planes} planes")
    depth = info["bitdepth"]
    arr = arr.reshape(height, width, planes) / float(2**depth - 1)
    return GridImage.from_array(GridKind.CENTER, arr)


def encode_png(u: GridImage, bit_depth: int = 8) -> bytes:
    expect_kind(u, GridKind.CENTER)
    if bit_depth not in (8, 16):
        raise ValueError(f"bit depth must be 8 or 16, got {bit_depth}")
    if u.channels not in (1, 3):
        raise ValueError(f"can only write 1 or 3 channels, got {u.channels}")
    top = 2**bit_depth - 1
    q = np.rint(np.clip(u.data, 0.0, 1.0) * top).astype(np.uint16 if bit_depth == 16 else np.uint8)
    height, width, planes = q.shape
    writer = png.Writer(width, height, greyscale=planes == 1, bitdepth=bit_depth)
    buf = io.BytesIO()
    writer.write(buf, q.reshape(height, width * planes))
    return buf.getvalue()


def save_png(u: GridImage, path, bit_depth: int = 8) -> None:
    """Write ``u`` (clamped to [0, 1]) as a PNG; identical inputs give identical bytes."""
    atomic_write(path, encode_png(u, bit_depth))


def atomic_write(path, data: bytes | str) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def add_gaussian_noise(u: GridImage, sigma: float, seed: int) -> GridImage:
    """u + sigma * xi with xi standard normal from ``numpy.random.default_rng(seed)``."""
    if not sigma >= 0:
        raise ValueError(f"noise level must be nonnegative, got {sigma}")
    if sigma == 0:
        return u
    xi = np.random.default_rng(seed).standard_normal(u.data.shape)
    return u.with_data(u.data + sigma * xi)


def array_hash(u: GridImage) -> str:
    h = hashlib.sha256()
    h.update(repr((u.kind.value, u.data.shape)).encode())
    h.update(np.ascontiguousarray(u.data).tobytes())
    return "sha256:" + h.hexdigest()


def file_hash(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunReport:
    """Everything needed to reproduce and compare a run."""

    command: str
    input_hash: str
    model: dict | None = None
    noise: dict | None = None
    metrics: dict | None = None
    energies: dict = field(default_factory=dict)
    tgv_values: dict = field(default_factory=dict)
    wall_time: float = 0.0
    settings: dict = field(default_factory=dict)
    version: str = __version__
    schema_version: int = REPORT_SCHEMA

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))

    def save(self, path) -> None:
        atomic_write(path, self.to_json() + "\n")
