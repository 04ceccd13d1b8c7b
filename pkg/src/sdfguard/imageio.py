"""Binary PGM/PPM and CSV field serialization.

Only the binary flavours (``P5`` and ``P6``) with ``maxval`` 255 are
handled.  Comments in headers are skipped on read and never written.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .tensor_core import as_field, as_image


class PnmError(ValueError):
    """Raised for malformed or unsupported PNM data."""


_WHITESPACE = b" \t\n\r\v\f"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= n:
            raise PnmError("truncated header")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or data[pos] not in _WHITESPACE:
        raise PnmError("missing whitespace after header")
    return tokens, pos + 1


def read_pnm(data: bytes) -> np.ndarray:
    """Decode binary PGM (``P5``) or PPM (``P6``) bytes into an image in [0, 1]."""
    if len(data) < 2:
        raise PnmError("truncated header")
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise PnmError(f"unsupported magic {magic!r}; only P5/P6 are read")
    tokens, offset = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise PnmError(f"malformed header field: {exc}") from None
    if width <= 0 or height <= 0:
        raise PnmError("non-positive image dimensions")
    if maxval != 255:
        raise PnmError(f"unsupported maxval {maxval}; only 255 is supported")
    expected = width * height * channels
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise PnmError(f"truncated payload: expected {expected} bytes, got {len(payload)}")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return raw.astype(np.float64) / 255.0


def write_pnm(image) -> bytes:
    img = as_image(image)
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("pixel values must lie in [0, 1] to be written as PNM")
    h, w, c = img.shape
    magic = "P5" if c == 1 else "P6"
    header = f"{magic}\n{w} {h}\n255\n".encode("ascii")
    payload = np.rint(img * 255.0).astype(np.uint8)
    return header + payload.tobytes()


def load_pnm(path) -> np.ndarray:
    return read_pnm(Path(path).read_bytes())


def save_pnm(path, image) -> None:
    Path(path).write_bytes(write_pnm(image))


def write_field_csv(field) -> str:
    """One line per row, values written with ``repr`` (shortest round-trip form)."""
    arr = as_field(field)
    lines = [",".join(repr(float(v)) for v in row) for row in arr]
    return "\n".join(lines) + "\n"


def read_field_csv(text: str) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty field CSV")
    values = [[float(v) for v in row.split(",")] for row in rows]
    if len({len(r) for r in values}) != 1:
        raise ValueError("ragged field CSV")
    return np.array(values, dtype=np.float64)


def field_to_pnm(field) -> np.ndarray:
    """Affinely map a field's ``[min, max]`` onto ``[0, 1]`` as a 1-channel image.

    A constant field maps to 0.5 everywhere.
    """
    arr = as_field(field)
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        out = np.full(arr.shape, 0.5)
    else:
        out = np.clip((arr - lo) / (hi - lo), 0.0, 1.0)
    return out[:, :, None]
