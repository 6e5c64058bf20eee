"""Pyramid containers: a JSON manifest plus one raw float64 file per band.

A container is either a directory or a ``.zip`` file with the same entries.
Band files hold little-endian float64 values in row-major order. Dual-tree
bands are stored as separate real and imaginary rasters.
"""

from __future__ import annotations

import io
import json
import os
import shutil
import tempfile
import zipfile
from pathlib import Path

import numpy as np

from .dtcwt import ORIENTATIONS, ComplexPyramid
from .dwt import BANDS, SubbandPyramid
from .filters import parse_family
from .imaging import atomic_write

__all__ = ["save_pyramid", "load_pyramid", "MANIFEST"]

MANIFEST = "manifest.json"
_DTYPE = np.dtype("<f8")
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def _angle(a: int) -> str:
    return f"{a:+d}"


def _entries(pyr) -> tuple[dict, list[tuple[str, np.ndarray]]]:
    files = [("lowpass.f64", np.asarray(pyr.lowpass))]
    bands = [{"name": "lowpass", "file": "lowpass.f64", "shape": list(np.shape(pyr.lowpass))}]
    if isinstance(pyr, ComplexPyramid):
        manifest = {"transform": "dtcwt", "family": "dtcwt", "orientations": list(ORIENTATIONS)}
        for lev, stack in enumerate(pyr.oriented, start=1):
            for i, angle in enumerate(ORIENTATIONS):
                for part, arr in (("real", stack[i].real), ("imag", stack[i].imag)):
                    name = f"L{lev}_{_angle(angle)}_{part}"
                    files.append((f"{name}.f64", arr))
                    bands.append({"name": name, "file": f"{name}.f64", "level": lev,
                                  "orientation": angle, "part": part, "shape": list(arr.shape)})
    else:
        manifest = {"transform": "dwt", "family": pyr.family.label}
        for lev, det in enumerate(pyr.details, start=1):
            for key in BANDS:
                name = f"L{lev}_{key}"
                files.append((f"{name}.f64", det[key]))
                bands.append({"name": name, "file": f"{name}.f64", "level": lev, "band": key,
                              "shape": list(det[key].shape)})
    manifest.update({
        "schema": 1,
        "levels": pyr.levels,
        "original_shape": list(pyr.original_shape),
        "dtype": "float64-le",
        "bands": bands,
    })
    return manifest, files


def _raw(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()


def save_pyramid(pyr, path) -> Path:
    """Write a pyramid to a directory, or to a zip archive if ``path`` ends in ``.zip``.

    The container appears only once it is complete.
    """
    path = Path(path)
    manifest, files = _entries(pyr)
    text = json.dumps(manifest, indent=2, sort_keys=True).encode() + b"\n"
    if path.suffix.lower() == ".zip":
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for name, payload in [(MANIFEST, text)] + [(n, _raw(a)) for n, a in files]:
                info = zipfile.ZipInfo(name, date_time=_ZIP_DATE)
                info.compress_type = zipfile.ZIP_DEFLATED
                info.external_attr = 0o644 << 16
                zf.writestr(info, payload)
        atomic_write(path, buf.getvalue())
        return path
    parent = path.parent
    parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{path.name}.", dir=parent))
    try:
        (tmp / MANIFEST).write_bytes(text)
        for name, arr in files:
            (tmp / name).write_bytes(_raw(arr))
        if path.exists():
            shutil.rmtree(path)
        os.replace(tmp, path)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return path


def _reader(path: Path):
    if path.is_dir():
        return lambda name: (path / name).read_bytes()
    if zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            members = {name: zf.read(name) for name in zf.namelist()}
        return members.__getitem__
    raise ValueError(f"{path} is neither a pyramid directory nor a zip container")


def load_pyramid(path):
    """Read a container written by ``save_pyramid``."""
    path = Path(path)
    read = _reader(path)
    try:
        manifest = json.loads(read(MANIFEST))
    except (KeyError, FileNotFoundError) as exc:
        raise ValueError(f"{path}: missing {MANIFEST}") from exc
    if manifest.get("schema") != 1:
        raise ValueError(f"{path}: unsupported container schema {manifest.get('schema')!r}")

    def band(entry):
        data = np.frombuffer(read(entry["file"]), dtype=_DTYPE)
        shape = tuple(entry["shape"])
        if data.size != int(np.prod(shape)):
            raise ValueError(f"{path}: band {entry['name']} has {data.size} values, expected {shape}")
        return data.reshape(shape).astype(np.float64)

    entries = {e["name"]: e for e in manifest["bands"]}
    levels = int(manifest["levels"])
    shape = tuple(manifest["original_shape"])
    low = band(entries["lowpass"])
    if manifest["transform"] == "dtcwt":
        oriented = []
        for lev in range(1, levels + 1):
            planes = []
            for angle in ORIENTATIONS:
                stem = f"L{lev}_{_angle(angle)}"
                planes.append(band(entries[f"{stem}_real"]) + 1j * band(entries[f"{stem}_imag"]))
            oriented.append(np.stack(planes))
        return ComplexPyramid(levels, low, tuple(oriented), shape)
    details = tuple(
        {key: band(entries[f"L{lev}_{key}"]) for key in BANDS} for lev in range(1, levels + 1)
    )
    return SubbandPyramid(levels, low, details, parse_family(manifest["family"]), shape)
