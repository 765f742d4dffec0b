"""Coded video container: header plus length-prefixed frame payloads.

Layout (little-endian): magic ``PRVC``, u32 width, u32 height, u32 fps_num,
u32 fps_den, u8 flags (bit 0: deblocking enabled), u8 GOP pattern length,
GOP pattern ASCII, u32 frame count, then per frame in decode order a u32
payload byte length followed by the payload.

Frame payloads are bit-packed exp-Golomb symbols::

    ue(display_index)  ue(frame_type)  ue(qp - 1)
    per macroblock, raster order:
        se(qp_delta)                     # reserved; always 0 today
        ue(intra_flag)                   # P/B frames only
        intra:  ue(mode)                 # 0 DC, 1 horizontal, 2 vertical
        inter:  ue(ref_select)           # B frames with a future anchor only
                se(mv_dy) se(mv_dx)
        per 4x4 block, raster order:
            ue(n_nonzero)
            n_nonzero x (ue(zero_run) se(level))   # zigzag order
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from ..errors import FormatError, TruncationError
from .gop import validate_gop_pattern

BITSTREAM_MAGIC = b"PRVC"

FRAME_TYPE_CODES = {"I": 0, "P": 1, "B": 2}
FRAME_TYPE_NAMES = {v: k for k, v in FRAME_TYPE_CODES.items()}

_FIXED = struct.Struct("<4sIIIIBB")


@dataclass
class Bitstream:
    """In-memory coded video; payloads are stored in decode order."""

    width: int
    height: int
    fps_num: int
    fps_den: int
    gop_pattern: str
    deblock_enabled: bool
    payloads: list[bytes]

    @property
    def frame_count(self) -> int:
        return len(self.payloads)

    @property
    def total_bits(self) -> int:
        return 8 * sum(len(p) for p in self.payloads)


def write_bitstream(stream: Bitstream, path: str | Path) -> None:
    validate_gop_pattern(stream.gop_pattern)
    gop = stream.gop_pattern.encode("ascii")
    if len(gop) > 255:
        raise FormatError("GOP pattern longer than 255 frames")
    with Path(path).open("wb") as fh:
        fh.write(
            _FIXED.pack(
                BITSTREAM_MAGIC,
                stream.width,
                stream.height,
                stream.fps_num,
                stream.fps_den,
                1 if stream.deblock_enabled else 0,
                len(gop),
            )
        )
        fh.write(gop)
        fh.write(struct.pack("<I", stream.frame_count))
        for payload in stream.payloads:
            fh.write(struct.pack("<I", len(payload)))
            fh.write(payload)


def read_bitstream(path: str | Path) -> Bitstream:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _FIXED.size:
        raise TruncationError(f"{path}: file shorter than bitstream header")
    magic, width, height, fps_num, fps_den, flags, gop_len = _FIXED.unpack_from(data)
    if magic != BITSTREAM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {BITSTREAM_MAGIC!r}")
    pos = _FIXED.size
    if len(data) < pos + gop_len + 4:
        raise TruncationError(f"{path}: truncated header")
    gop_pattern = data[pos : pos + gop_len].decode("ascii")
    validate_gop_pattern(gop_pattern)
    pos += gop_len
    (frame_count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    payloads = []
    for i in range(frame_count):
        if len(data) < pos + 4:
            raise TruncationError(f"{path}: missing length prefix for frame {i}")
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if len(data) < pos + length:
            raise TruncationError(f"{path}: frame {i} payload truncated")
        payloads.append(data[pos : pos + length])
        pos += length
    return Bitstream(width, height, fps_num, fps_den, gop_pattern, bool(flags & 1), payloads)
