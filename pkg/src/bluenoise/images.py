"""Minimal binary PGM/PPM image IO (maxval 255 or 65535, big-endian)."""

from __future__ import annotations

import numpy as np


def _encode(values: np.ndarray, maxval: int) -> np.ndarray:
    q = np.clip(np.rint(np.asarray(values, dtype=np.float64) * maxval), 0, maxval)
    return q.astype(">u2" if maxval > 255 else np.uint8)


def write_pgm(values: np.ndarray, path, maxval: int = 255) -> None:
    """Write grayscale values in [0, 1] as binary PGM (P5)."""
    if values.ndim != 2:
        raise ValueError("PGM wants a 2D array")
    h, w = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode())
        fh.write(_encode(values, maxval).tobytes())


def write_ppm(values: np.ndarray, path, maxval: int = 255) -> None:
    """Write RGB values in [0, 1], shape (H, W, 3), as binary PPM (P6)."""
    if values.ndim != 3 or values.shape[2] != 3:
        raise ValueError("PPM wants an (H, W, 3) array")
    h, w, _ = values.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n{maxval}\n".encode())
        fh.write(_encode(values, maxval).tobytes())


def _read_header(fh) -> tuple[bytes, list[int]]:
    magic = fh.read(2)
    fields: list[int] = []
    while len(fields) < 3:
        tok = b""
        ch = fh.read(1)
        while ch.isspace():
            ch = fh.read(1)
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        while ch and not ch.isspace():
            tok += ch
            ch = fh.read(1)
        if not tok:
            raise ValueError("truncated image header")
        fields.append(int(tok))
    return magic, fields


def read_image(path) -> np.ndarray:
    """Read binary PGM/PPM into floats in [0, 1]; PPM gives (H, W, 3)."""
    with open(path, "rb") as fh:
        magic, (w, h, maxval) = _read_header(fh)
        if magic not in (b"P5", b"P6"):
            raise ValueError(f"unsupported image magic {magic!r}")
        channels = 3 if magic == b"P6" else 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        count = w * h * channels
        raw = np.frombuffer(fh.read(count * dtype.itemsize), dtype=dtype)
        if raw.size != count:
            raise ValueError("truncated image payload")
    out = raw.astype(np.float64) / maxval
    return out.reshape(h, w, 3) if channels == 3 else out.reshape(h, w)
