"""Macroblock-level helpers shared by the encoder and the decoder.

Keeping reconstruction arithmetic in one place is what guarantees the two
sides stay bit-exact: the encoder's internal reference frames and the
decoder's output are produced by the same functions in the same order.
"""

from __future__ import annotations

import numpy as np

from ..errors import FormatError
from ..mbmeta import MB_SIZE
from .bits import BitReader, BitWriter
from .transform import ZIGZAG, dequantize, forward_transform_blocks, inverse_transform_blocks, quantize

ZZ_FLAT = [4 * r + c for r, c in ZIGZAG]
_UNZIGZAG = np.argsort(ZZ_FLAT)


def mb_to_blocks(mb: np.ndarray) -> np.ndarray:
    """Split a 16x16 macroblock into a (4, 4, 4, 4) stack of 4x4 blocks."""
    return mb.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3)


def blocks_to_mb(blocks: np.ndarray) -> np.ndarray:
    return blocks.transpose(0, 2, 1, 3).reshape(MB_SIZE, MB_SIZE)


def code_residual(residual: np.ndarray, qp: int) -> np.ndarray:
    """Transform and quantize a 16x16 residual into (4, 4, 4, 4) levels."""
    return quantize(forward_transform_blocks(mb_to_blocks(residual)), qp)


def decode_residual(levels: np.ndarray, qp: int) -> np.ndarray:
    """Dequantize and inverse-transform levels back to a 16x16 residual."""
    return blocks_to_mb(inverse_transform_blocks(dequantize(levels, qp)))


def reconstruct_mb(pred: np.ndarray, residual: np.ndarray) -> np.ndarray:
    """Clip-and-round reconstruction; shared verbatim by both codec sides."""
    return np.clip(np.round(pred + residual), 0, 255).astype(np.int32)


def write_coeff_block(writer: BitWriter, levels_4x4: np.ndarray) -> None:
    """Zigzag run-length coding: count, then (zero-run, level) pairs."""
    zz = levels_4x4.ravel()[ZZ_FLAT]
    if not zz.any():
        writer.write_ue(0)
        return
    nz = np.nonzero(zz)[0]
    writer.write_ue(len(nz))
    prev = -1
    values = zz.tolist()
    for pos in nz.tolist():
        writer.write_ue(pos - prev - 1)
        writer.write_se(values[pos])
        prev = pos


def read_coeff_block(reader: BitReader) -> np.ndarray:
    count = reader.read_ue()
    if count > 16:
        raise FormatError(f"corrupt stream: {count} coefficients in a 4x4 block")
    zz = np.zeros(16, dtype=np.int64)
    pos = -1
    for _ in range(count):
        pos += reader.read_ue() + 1
        if pos > 15:
            raise FormatError("corrupt stream: coefficient run past block end")
        zz[pos] = reader.read_se()
    return zz[_UNZIGZAG].reshape(4, 4)
