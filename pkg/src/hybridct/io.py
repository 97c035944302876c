"""Binary image/sinogram files and PNG export.

File layout: one newline-terminated JSON header, ``{"kind": "image", "n": n}`` or
``{"kind": "sinogram", "p": p, "q": q}``, then row-major little-endian float64.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, KindMismatchError, TruncationError
from .geometry import Image, ImageGrid
from .radon import ScanGeometry, Sinogram

_DTYPE = np.dtype("<f8")


def _write(path, header: dict, values: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii") + b"\n")
        fh.write(np.ascontiguousarray(values, dtype=_DTYPE).tobytes())


def _read(path, kind: str) -> tuple[dict, bytes]:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed header: {exc}") from exc
    if not isinstance(header, dict) or "kind" not in header:
        raise FormatError(f"{path}: header has no 'kind'")
    if header["kind"] != kind:
        raise KindMismatchError(f"{path}: expected kind {kind!r}, found {header['kind']!r}")
    return header, raw[nl + 1:]


def _payload(path, payload: bytes, count: int) -> np.ndarray:
    expected = count * _DTYPE.itemsize
    if len(payload) != expected:
        what = "truncated" if len(payload) < expected else "oversized"
        raise TruncationError(f"{path}: {what} payload, expected {expected} bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=_DTYPE).astype(np.float64)


def _positive_int(header: dict, key: str, path) -> int:
    val = header.get(key)
    if not isinstance(val, int) or isinstance(val, bool) or val <= 0:
        raise FormatError(f"{path}: header field {key!r} must be a positive integer, got {val!r}")
    return val


def write_image(path, image: Image) -> None:
    _write(path, {"kind": "image", "n": image.grid.n_pix}, image.values)


def read_image(path) -> Image:
    header, payload = _read(path, "image")
    n = _positive_int(header, "n", path)
    return Image(ImageGrid(n), _payload(path, payload, n * n).reshape(n, n))


def write_sinogram(path, sino: Sinogram) -> None:
    g = sino.geometry
    _write(path, {"kind": "sinogram", "p": g.p, "q": g.q}, sino.values)


def read_sinogram(path) -> Sinogram:
    header, payload = _read(path, "sinogram")
    geom = ScanGeometry(_positive_int(header, "p", path), _positive_int(header, "q", path))
    return Sinogram(geom, _payload(path, payload, geom.p * geom.n_offsets).reshape(geom.shape))


def to_uint8(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to 0..255; a constant image maps to 0."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return np.zeros(v.shape, dtype=np.uint8)
    return np.round((v - lo) / (hi - lo) * 255.0).astype(np.uint8)


def export_png(image, path) -> None:
    from PIL import Image as PILImage

    values = image.values if hasattr(image, "values") else image
    PILImage.fromarray(to_uint8(values)).save(path)
