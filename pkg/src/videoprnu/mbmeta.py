"""Per-macroblock decode records."""

from __future__ import annotations

from dataclasses import dataclass

MB_SIZE = 16


@dataclass(frozen=True)
class MacroblockMeta:
    """One decoded macroblock: where it sits, how it was coded, what it cost.

    ``residual_energy`` is the sum of squared prediction residual. The
    encoder reports it before quantization; the decoder, which never sees
    the original samples, reports the energy of the dequantized residual.
    """

    frame_index: int
    x: int
    y: int
    width: int
    height: int
    mb_type: str  # "I", "P" or "B"
    qp: int
    bits: int
    residual_energy: float


def group_by_frame(meta: list[MacroblockMeta]) -> dict[int, list[MacroblockMeta]]:
    """Bucket metadata rows by frame index, preserving order."""
    frames: dict[int, list[MacroblockMeta]] = {}
    for m in meta:
        frames.setdefault(m.frame_index, []).append(m)
    return frames
