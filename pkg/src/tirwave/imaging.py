"""Grayscale image container, file I/O, rescaling and synthetic thermal noise."""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = [
    "Image",
    "ImageFormatError",
    "NoiseSpec",
    "NOISE_KINDS",
    "load_image",
    "save_image",
    "rescale_minmax",
    "add_noise",
    "noise_field",
    "synthetic_scene",
    "atomic_write",
]

NOISE_KINDS = ("gaussian", "column-fpn", "row-fpn", "strip")
_DEPTHS = (8, 16)


class ImageFormatError(ValueError):
    """Raised for unreadable, truncated or unsupported image files."""

    def __init__(self, detail: str = ""):
        msg = "unsupported or corrupt image"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True)
class Image:
    """Single-channel raster with values normalised to [0, 1].

    The pixel array is copied to float64 and marked read-only so an Image can
    be shared between threads without defensive copies.
    """

    data: np.ndarray
    source_depth: int = 8

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"image data must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have at least one row and one column")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image data must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image data must lie in [0, 1]")
        if self.source_depth not in _DEPTHS:
            raise ValueError(f"source_depth must be 8 or 16, got {self.source_depth}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @classmethod
    def clipped(cls, values, source_depth: int = 8) -> "Image":
        """Build an Image after clamping arbitrary values into [0, 1]."""
        return cls(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0), source_depth)


def as_array(x) -> np.ndarray:
    """Return the float64 pixel array behind an Image or array-like."""
    if isinstance(x, Image):
        return x.data
    return np.asarray(x, dtype=np.float64)


# ---------------------------------------------------------------------------
# file I/O

def _pgm_tokens(buf: bytes, count: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated header integers, skipping comments."""
    vals, pos, n = [], 2, len(buf)
    while len(vals) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and buf[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ImageFormatError("bad graymap header")
        vals.append(int(buf[start:pos]))
    return vals, pos


def _read_pgm(buf: bytes) -> tuple[np.ndarray, int]:
    magic = buf[:2]
    (width, height, maxval), pos = _pgm_tokens(buf, 3)
    if width < 1 or height < 1:
        raise ImageFormatError("zero-dimension image")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"bad maxval {maxval}")
    depth = 8 if maxval < 256 else 16
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        dtype = np.dtype(">u2") if depth == 16 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(buf) - pos < need:
            raise ImageFormatError("truncated raster")
        raw = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    else:
        parts = buf[pos:].split()
        if len(parts) < count:
            raise ImageFormatError("truncated raster")
        try:
            raw = np.array([int(p) for p in parts[:count]], dtype=np.int64)
        except ValueError as exc:
            raise ImageFormatError("non-numeric raster") from exc
    raw = raw.reshape(height, width).astype(np.float64)
    if raw.max() > maxval:
        raise ImageFormatError("pixel exceeds maxval")
    return raw / maxval, depth


def _read_png(path: Path) -> tuple[np.ndarray, int]:
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            arr = np.array(im)
    except (OSError, SyntaxError, ValueError) as exc:
        raise ImageFormatError(str(exc)) from exc
    if mode == "L":
        return arr.astype(np.float64) / 255.0, 8
    if mode.startswith("I;16") or mode == "I":
        if arr.min() < 0 or arr.max() > 65535:
            raise ImageFormatError("32-bit data outside 16-bit range")
        return arr.astype(np.float64) / 65535.0, 16
    raise ImageFormatError(f"mode {mode} is not single-channel 8/16-bit")


def load_image(path) -> Image:
    """Read a P2/P5 graymap or 8/16-bit grayscale PNG into an Image."""
    path = Path(path)
    buf = path.read_bytes()
    if buf[:2] in (b"P2", b"P5"):
        data, depth = _read_pgm(buf)
    elif buf[:8] == b"\x89PNG\r\n\x1a\n":
        data, depth = _read_png(path)
    else:
        raise ImageFormatError("unrecognised signature")
    if data.size == 0:
        raise ImageFormatError("zero-dimension image")
    return Image(data, depth)


def quantize(values, depth: int) -> np.ndarray:
    """Clamp to [0, 1] and round half up onto the integer grid of ``depth`` bits."""
    if depth not in _DEPTHS:
        raise ValueError(f"depth must be 8 or 16, got {depth}")
    top = (1 << depth) - 1
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.floor(v * top + 0.5).astype(np.uint16 if depth == 16 else np.uint8)


def atomic_write(path, payload: bytes) -> None:
    """Write bytes to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_image(image: Image, path, depth: int = 8) -> None:
    """Write ``image`` as binary PGM (``.pgm``) or PNG (anything else)."""
    path = Path(path)
    q = quantize(as_array(image), depth)
    if path.suffix.lower() in (".pgm", ".pnm"):
        header = f"P5\n{q.shape[1]} {q.shape[0]}\n{(1 << depth) - 1}\n".encode("ascii")
        body = q.astype(">u2").tobytes() if depth == 16 else q.tobytes()
        atomic_write(path, header + body)
        return
    buf = io.BytesIO()
    PILImage.fromarray(q).save(buf, format="PNG")
    atomic_write(path, buf.getvalue())


def rescale_minmax(raw, source_depth: int = 16) -> Image:
    """Affinely map a raster onto [0, 1]; constant rasters become all zeros."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("raster is empty")
    if arr.ndim == 1:
        arr = arr[None, :]
    if not np.all(np.isfinite(arr)):
        raise ValueError("raster must be finite")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return Image(np.zeros_like(arr), source_depth)
    return Image.clipped((arr - lo) / (hi - lo), source_depth)


# ---------------------------------------------------------------------------
# synthetic noise

@dataclass(frozen=True)
class NoiseSpec:
    """Parameters of a synthetic degradation.

    ``amplitude`` is the standard deviation of the per-pixel (gaussian),
    per-column, per-row or per-strip offsets, in normalised intensity units.
    """

    kind: str
    amplitude: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {', '.join(NOISE_KINDS)}")
        amp = float(self.amplitude)
        if not np.isfinite(amp) or amp < 0:
            raise ValueError("noise amplitude must be finite and >= 0")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "seed", int(self.seed))

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "amplitude": self.amplitude, "seed": self.seed},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NoiseSpec":
        obj = json.loads(text)
        return cls(obj["kind"], obj["amplitude"], obj.get("seed", 0))

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "NoiseSpec":
        """Parse the ``kind:amplitude`` shorthand used on the command line."""
        kind, sep, amp = text.partition(":")
        if not sep:
            raise ValueError(f"noise must look like kind:amplitude, got {text!r}")
        return cls(kind.strip(), float(amp), seed)


def _rng(seed: int) -> np.random.Generator:
    # Philox is counter based, so streams are identical on every platform.
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))


def noise_field(shape: tuple[int, int], spec: NoiseSpec) -> np.ndarray:
    """The additive noise field for ``spec`` before clamping."""
    h, w = shape
    rng = _rng(spec.seed)
    if spec.amplitude == 0:
        return np.zeros((h, w))
    if spec.kind == "gaussian":
        return rng.normal(0.0, spec.amplitude, size=(h, w))
    if spec.kind == "column-fpn":
        return np.broadcast_to(rng.normal(0.0, spec.amplitude, size=w)[None, :], (h, w)).copy()
    if spec.kind == "row-fpn":
        return np.broadcast_to(rng.normal(0.0, spec.amplitude, size=h)[:, None], (h, w)).copy()
    # strip: contiguous column groups 2..8 wide sharing one offset
    offsets = np.empty(w)
    col = 0
    while col < w:
        width = int(rng.integers(2, 9))
        offsets[col:col + width] = rng.normal(0.0, spec.amplitude)
        col += width
    return np.broadcast_to(offsets[None, :], (h, w)).copy()


def add_noise(clean: Image, spec: NoiseSpec) -> Image:
    """Add the noise described by ``spec`` and clamp back into [0, 1]."""
    return Image.clipped(clean.data + noise_field(clean.shape, spec), clean.source_depth)


def synthetic_scene(shape: tuple[int, int], seed: int = 0) -> Image:
    """A smooth thermal-like scene: a gentle ramp plus a few warm blobs.

    Values stay within [0.2, 0.8] so moderate noise rarely clips.
    """
    h, w = shape
    rng = _rng(seed)
    y, x = np.mgrid[0:h, 0:w].astype(np.float64)
    y /= max(h - 1, 1)
    x /= max(w - 1, 1)
    theta = rng.uniform(0, 2 * np.pi)
    scene = 0.5 * (np.cos(theta) * x + np.sin(theta) * y)
    for _ in range(int(rng.integers(3, 7))):
        cy, cx = rng.uniform(0.1, 0.9, size=2)
        rad = rng.uniform(0.08, 0.3)
        amp = rng.uniform(-1.0, 1.0)
        scene += amp * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / (2 * rad ** 2))
    lo, hi = scene.min(), scene.max()
    scene = (scene - lo) / (hi - lo) if hi > lo else np.zeros_like(scene)
    return Image(0.2 + 0.6 * scene)
