"""Binary mask container: header + payload, little-endian, versioned.

Layout (all integers little-endian):

    offset  size  field
    0       8     magic "BNMASK\\r\\n"
    8       1     format version (currently 1)
    9       1     payload kind: 0 = f32 values, 1 = quantized u8, 2 = u16 ranks
    10      1     bit depth (quantized payloads; 0 otherwise)
    11      1     float convention: 0 = (rank+1/2)/N, 1 = rank/N (f32 only)
    12      1     dimension count D
    13      3     reserved (zero)
    16      8     u64 seed
    24      8     f64 initial density
    32      4*D   u32 extent per axis, axis 0 first
    ...     1     group count
    per group:
            1     axis count A
            A     u8 axis indices
            8     f64 sigma
            A     u8 toroidal flags (0/1)
    ...     N*elem payload bytes, linear pixel order (axis 0 fastest)

Decoding validates the magic, version, header consistency (the declared
spec must be a valid MaskSpec), and the exact payload length before
trusting any bytes; rank payloads must be permutations and quantized
payloads must fit their bit depth. Every failure mode raises a distinct
ContainerError subclass and never reads past the buffer.
"""

from __future__ import annotations

import struct
from typing import Union

import numpy as np

from .generator import Mask, RankMask
from .grid import AxisGroup, MaskSpec

MAGIC = b"BNMASK\r\n"
VERSION = 1

KIND_F32 = 0
KIND_U8 = 1
KIND_RANKS_U16 = 2

_ELEM_SIZE = {KIND_F32: 4, KIND_U8: 1, KIND_RANKS_U16: 2}
_MAX_PIXELS = 1 << 40  # sanity bound against absurd declared extents


class ContainerError(Exception):
    """Base for all mask container failures."""


class BadMagicError(ContainerError):
    pass


class VersionError(ContainerError):
    pass


class HeaderError(ContainerError):
    pass


class PayloadError(ContainerError):
    pass


def encode_mask_bytes(obj: Union[Mask, RankMask]) -> bytes:
    spec = obj.spec
    if isinstance(obj, RankMask):
        kind, depth, convention = KIND_RANKS_U16, 0, 0
        if spec.pixel_count > 1 << 16:
            raise ContainerError(
                "rank payloads are u16: at most 65536 pixels"
            )
        payload = obj.ranks.astype("<u2").tobytes()
    elif isinstance(obj, Mask):
        if obj.bit_depth is None:
            kind, depth = KIND_F32, 0
            convention = 0 if obj.centered else 1
            payload = obj.payload.astype("<f4").tobytes()
        else:
            if obj.bit_depth > 8:
                raise ContainerError("quantized payloads are u8: depth <= 8")
            kind, depth, convention = KIND_U8, obj.bit_depth, 0
            payload = obj.payload.astype(np.uint8).tobytes()
    else:
        raise TypeError(f"cannot encode {type(obj).__name__}")

    head = bytearray()
    head += MAGIC
    head += struct.pack("<BBBBB3x", VERSION, kind, depth, convention, spec.ndim)
    head += struct.pack("<Qd", spec.seed & 0xFFFFFFFFFFFFFFFF,
                        spec.initial_density)
    head += struct.pack(f"<{spec.ndim}I", *spec.sizes)
    head += struct.pack("<B", len(spec.groups))
    for g in spec.groups:
        head += struct.pack("<B", len(g.axes))
        head += bytes(g.axes)
        head += struct.pack("<d", g.sigma)
        head += bytes(int(t) for t in g.toroidal)
    return bytes(head) + payload


def encode_mask(obj: Union[Mask, RankMask], path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_mask_bytes(obj))


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        try:
            out = struct.unpack_from(fmt, self.data, self.pos)
        except struct.error:
            raise HeaderError("truncated header") from None
        self.pos += struct.calcsize(fmt)
        return out


def decode_mask_bytes(data: bytes) -> Union[Mask, RankMask]:
    if data[:8] != MAGIC:
        raise BadMagicError(f"not a mask container (magic {data[:8]!r})")
    cur = _Cursor(data)
    cur.pos = 8
    version, kind, depth, convention, ndim = cur.take("<BBBBB3x")
    if version != VERSION:
        raise VersionError(f"unsupported container version {version}")
    if kind not in _ELEM_SIZE:
        raise HeaderError(f"unknown payload kind {kind}")
    if ndim < 1:
        raise HeaderError("dimension count must be positive")
    seed, density = cur.take("<Qd")
    sizes = cur.take(f"<{ndim}I")
    total = 1
    for s in sizes:
        total *= int(s)
    if not 0 < total <= _MAX_PIXELS:
        raise HeaderError(f"declared pixel count {total} out of range")
    (ngroups,) = cur.take("<B")
    groups = []
    for _ in range(ngroups):
        (naxes,) = cur.take("<B")
        axes = cur.take(f"<{naxes}B")
        (sigma,) = cur.take("<d")
        tor = cur.take(f"<{naxes}B")
        if any(t not in (0, 1) for t in tor):
            raise HeaderError("toroidal flags must be 0 or 1")
        try:
            groups.append(AxisGroup(axes, sigma, tuple(bool(t) for t in tor)))
        except ValueError as e:
            raise HeaderError(str(e)) from None
    try:
        spec = MaskSpec(sizes, tuple(groups), seed, density)
    except ValueError as e:
        raise HeaderError(str(e)) from None

    expect = spec.pixel_count * _ELEM_SIZE[kind]
    got = len(data) - cur.pos
    if got < expect:
        raise PayloadError(f"truncated payload: {got} bytes, need {expect}")
    if got > expect:
        raise PayloadError(f"trailing data: {got - expect} extra bytes")
    raw = data[cur.pos :]

    if kind == KIND_RANKS_U16:
        ranks = np.frombuffer(raw, dtype="<u2").astype(np.int64)
        if not np.array_equal(np.sort(ranks), np.arange(spec.pixel_count)):
            raise PayloadError("rank payload is not a permutation")
        return RankMask(ranks, spec)
    if kind == KIND_U8:
        if not 1 <= depth <= 8:
            raise HeaderError(f"bad bit depth {depth} for quantized payload")
        payload = np.frombuffer(raw, dtype=np.uint8).copy()
        if payload.max(initial=0) >= 1 << depth:
            raise PayloadError(f"values exceed {depth}-bit range")
        return Mask(payload, spec, depth)
    payload = np.frombuffer(raw, dtype="<f4").astype(np.float32)
    return Mask(payload, spec, None, centered=convention == 0)


def decode_mask(path) -> Union[Mask, RankMask]:
    with open(path, "rb") as fh:
        return decode_mask_bytes(fh.read())
