"""On-disk formats: fields, JSON reports, run manifests.

1D fields are two-column plain text (coordinate, value).  2D fields travel
in two forms: a 16-bit grayscale PNG for display and a raw little-endian
float64 payload with a one-line JSON header for lossless round trips.
Reports and configs are UTF-8 JSON with sorted keys, so identical content is
byte-identical on disk.
"""

from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .grids import Grid, SampledField

__all__ = [
    "canonical_json",
    "config_hash",
    "write_json",
    "save_field_txt",
    "load_field_txt",
    "save_field_raw",
    "load_field_raw",
    "png_bytes_16bit",
    "save_field_png",
    "save_field",
    "write_manifest",
]

RAW_MAGIC = b"molldeconv-field v1\n"


def canonical_json(obj) -> str:
    """Stable serialization: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical serialization; stable under key reordering."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def save_field_txt(path, field: SampledField) -> Path:
    """Two-column text for 1D fields: coordinate, real value."""
    if field.grid.dims != 1:
        raise ValueError("text format is for 1D fields")
    path = Path(path)
    x = field.grid.axis_coordinates(0)
    np.savetxt(path, np.column_stack([x, field.values.real]), fmt="%.17g")
    return path


def load_field_txt(path) -> SampledField:
    data = np.loadtxt(Path(path))
    x, v = data[:, 0], data[:, 1]
    spacing = float(x[1] - x[0])
    grid = Grid(shape=(len(x),), spacing=spacing, origin=float(x[0]))
    return SampledField(grid, v)


def save_field_raw(path, field: SampledField) -> Path:
    """Raw little-endian float64 with a JSON header line; lossless for real fields."""
    path = Path(path)
    header = canonical_json(
        {
            "shape": list(field.grid.shape),
            "spacing": list(field.grid.spacing),
            "origin": list(field.grid.origin),
            "dtype": "<f8",
        }
    )
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(header.encode("utf-8") + b"\n")
        fh.write(np.ascontiguousarray(field.values.real, dtype="<f8").tobytes())
    return path


def load_field_raw(path) -> SampledField:
    with open(Path(path), "rb") as fh:
        magic = fh.readline()
        if magic != RAW_MAGIC:
            raise ValueError(f"not a raw field file: bad magic {magic!r}")
        header = json.loads(fh.readline().decode("utf-8"))
        values = np.frombuffer(fh.read(), dtype="<f8").reshape(header["shape"])
    grid = Grid(
        shape=tuple(header["shape"]),
        spacing=tuple(header["spacing"]),
        origin=tuple(header["origin"]),
    )
    return SampledField(grid, values)


def png_bytes_16bit(values: np.ndarray) -> bytes:
    """Encode a real 2D array as a min-max scaled 16-bit grayscale PNG."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError("PNG export needs a 2D array")
    lo, hi = float(arr.min()), float(arr.max())
    scaled = np.zeros(arr.shape) if hi == lo else (arr - lo) / (hi - lo)
    img = Image.fromarray(np.round(scaled * 65535.0).astype(np.uint16), mode="I;16")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def save_field_png(path, field: SampledField) -> Path:
    path = Path(path)
    path.write_bytes(png_bytes_16bit(field.values.real))
    return path


def save_field(out_dir, name: str, field: SampledField) -> list[str]:
    """Write a field in its canonical format(s); returns the emitted file names."""
    out_dir = Path(out_dir)
    if field.grid.dims == 1:
        save_field_txt(out_dir / f"{name}.txt", field)
        return [f"{name}.txt"]
    save_field_raw(out_dir / f"{name}.f64", field)
    save_field_png(out_dir / f"{name}.png", field)
    return [f"{name}.f64", f"{name}.png"]


def _versions() -> dict:
    from . import __version__

    return {"molldeconv": __version__, "numpy": np.__version__}


def write_manifest(out_dir, config: dict, seeds: dict, outputs: list[str], summary: dict) -> Path:
    """Run manifest: config hash, seeds, component versions, outputs, summary.

    Deterministic by construction (no timestamps); timings live in a sidecar
    excluded from the byte-identical contract.
    """
    manifest = {
        "config_hash": config_hash(config),
        "seeds": seeds,
        "versions": _versions(),
        "outputs": sorted(outputs),
        "summary": summary,
    }
    return write_json(Path(out_dir) / "manifest.json", manifest)
