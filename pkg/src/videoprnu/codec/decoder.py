"""Reference decoder with standard and loop-filter-bypass outputs.

Every decode pass maintains two reconstructions per frame:

* the *filtered* plane (deblocked), which always feeds motion-compensated
  prediction so the prediction chain matches the encoder;
* the *unfiltered* plane, which feeds intra prediction within the frame.

``mode="filtered"`` returns the filtered planes -- the normal viewing
output, bit-exact with the encoder's internal reconstruction.
``mode="intervention"`` returns the unfiltered planes instead, which keep
the sensor noise the deblocking filter would smooth away; prediction still
uses filtered references, so both modes decode the identical stream state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FormatError
from ..mbmeta import MB_SIZE, MacroblockMeta
from .bits import BitReader
from .bitstream import FRAME_TYPE_NAMES, Bitstream
from .common import decode_residual, read_coeff_block, reconstruct_mb
from .deblock import TB, BlockGrid, deblock_filter
from .gop import FramePlan, plan_frames
from .predict import intra_prediction, mc_prediction
from .transform import QP_MAX, QP_MIN

MODE_FILTERED = "filtered"
MODE_INTERVENTION = "intervention"


@dataclass
class DecodeOutput:
    """Decoded frames in display order plus per-macroblock metadata."""

    frames: list[np.ndarray]
    meta: list[MacroblockMeta]
    mode: str

    @property
    def n_frames(self) -> int:
        return len(self.frames)


def _read_frame_header(reader: BitReader, n_frames: int) -> tuple[int, str, int]:
    display = reader.read_ue()
    if display >= n_frames:
        raise FormatError(f"corrupt stream: display index {display} out of range")
    type_code = reader.read_ue()
    if type_code not in FRAME_TYPE_NAMES:
        raise FormatError(f"corrupt stream: unknown frame type code {type_code}")
    qp = reader.read_ue() + 1
    if not QP_MIN <= qp <= QP_MAX:
        raise FormatError(f"corrupt stream: qp {qp} out of range")
    return display, FRAME_TYPE_NAMES[type_code], qp


def _decode_frame(
    payload: bytes,
    plan: FramePlan,
    width: int,
    height: int,
    refs: list[tuple[int, np.ndarray]],
    n_frames: int,
) -> tuple[np.ndarray, BlockGrid, list[MacroblockMeta], int]:
    reader = BitReader(payload)
    display, frame_type, qp = _read_frame_header(reader, n_frames)
    if display != plan.display_index or frame_type != plan.frame_type:
        raise FormatError(
            f"corrupt stream: frame header ({display}, {frame_type}) does not match "
            f"GOP schedule ({plan.display_index}, {plan.frame_type})"
        )

    recon = np.zeros((height, width), dtype=np.int32)
    grid = BlockGrid(height, width)
    meta: list[MacroblockMeta] = []

    for mby in range(0, height, MB_SIZE):
        for mbx in range(0, width, MB_SIZE):
            start_bit = reader.bit_position
            qp_delta = reader.read_se()
            mb_qp = qp + qp_delta
            if not QP_MIN <= mb_qp <= QP_MAX:
                raise FormatError(f"corrupt stream: macroblock qp {mb_qp} out of range")

            use_intra = True
            if frame_type != "I":
                flag = reader.read_ue()
                if flag > 1:
                    raise FormatError("corrupt stream: bad intra flag")
                use_intra = flag == 1

            ref_sel, mv = 0, (0, 0)
            if use_intra:
                mode = reader.read_ue()
                if mode > 2:
                    raise FormatError(f"corrupt stream: intra mode {mode}")
                pred = intra_prediction(recon, mby, mbx, mode)
                mb_type = "I"
            else:
                if frame_type == "B" and len(refs) > 1:
                    ref_sel = reader.read_ue()
                    if ref_sel >= len(refs):
                        raise FormatError("corrupt stream: bad reference select")
                mv = (reader.read_se(), reader.read_se())
                ref_plane = refs[ref_sel][1]
                y, x = mby + mv[0], mbx + mv[1]
                if not (0 <= y <= height - MB_SIZE and 0 <= x <= width - MB_SIZE):
                    raise FormatError(f"corrupt stream: motion vector {mv} out of frame")
                pred = mc_prediction(ref_plane, mby, mbx, mv)
                mb_type = frame_type

            levels = np.zeros((4, 4, 4, 4), dtype=np.int64)
            for by in range(4):
                for bx in range(4):
                    levels[by, bx] = read_coeff_block(reader)
                    grid.set_coded(mby + TB * by, mbx + TB * bx, bool(levels[by, bx].any()))

            residual = decode_residual(levels, mb_qp)
            recon[mby : mby + MB_SIZE, mbx : mbx + MB_SIZE] = reconstruct_mb(pred, residual)
            grid.set_macroblock(
                mby,
                mbx,
                intra=use_intra,
                qp=mb_qp,
                mv=mv if not use_intra else (0, 0),
                ref=refs[ref_sel][0] if not use_intra else -1,
            )
            meta.append(
                MacroblockMeta(
                    frame_index=display,
                    x=mbx,
                    y=mby,
                    width=MB_SIZE,
                    height=MB_SIZE,
                    mb_type=mb_type,
                    qp=mb_qp,
                    bits=reader.bit_position - start_bit,
                    residual_energy=float((residual * residual).sum()),
                )
            )

    return recon, grid, meta, display


def decode_both(stream: Bitstream) -> tuple[DecodeOutput, DecodeOutput]:
    """One decode pass; returns (filtered output, intervention output)."""
    plans = plan_frames(stream.gop_pattern, stream.frame_count)
    by_display = {p.display_index: p for p in plans}

    filtered: dict[int, np.ndarray] = {}
    unfiltered: dict[int, np.ndarray] = {}
    meta: list[MacroblockMeta] = []

    for payload in stream.payloads:
        display = _peek_display_index(payload, stream.frame_count)
        plan = by_display[display]
        refs = []
        for ref in (plan.past_ref, plan.future_ref):
            if ref is not None:
                if ref not in filtered:
                    raise FormatError(
                        f"corrupt stream: frame {display} precedes its reference {ref}"
                    )
                refs.append((ref, filtered[ref]))
        recon, grid, frame_meta, _ = _decode_frame(
            payload, plan, stream.width, stream.height, refs, stream.frame_count
        )
        unfiltered[display] = recon
        filtered[display] = (
            deblock_filter(recon, grid) if stream.deblock_enabled else recon.copy()
        )
        meta.extend(frame_meta)

    if len(filtered) != stream.frame_count:
        raise FormatError("corrupt stream: duplicate or missing frames")
    meta.sort(key=lambda m: (m.frame_index, m.y, m.x))
    n = stream.frame_count
    filtered_frames = [filtered[i].astype(np.uint8) for i in range(n)]
    unfiltered_frames = [unfiltered[i].astype(np.uint8) for i in range(n)]
    return (
        DecodeOutput(filtered_frames, meta, MODE_FILTERED),
        DecodeOutput(unfiltered_frames, list(meta), MODE_INTERVENTION),
    )


def decode(stream: Bitstream, mode: str = MODE_FILTERED) -> DecodeOutput:
    """Decode a stream in ``filtered`` or ``intervention`` mode."""
    if mode not in (MODE_FILTERED, MODE_INTERVENTION):
        raise FormatError(f"unknown decode mode {mode!r}")
    both = decode_both(stream)
    return both[0] if mode == MODE_FILTERED else both[1]


def _peek_display_index(payload: bytes, n_frames: int) -> int:
    reader = BitReader(payload)
    display = reader.read_ue()
    if display >= n_frames:
        raise FormatError(f"corrupt stream: display index {display} out of range")
    return display


def decode_i_frames_only(stream: Bitstream, mode: str = MODE_FILTERED) -> DecodeOutput:
    """Decode only the self-contained I frames, skipping inter payloads."""
    if mode not in (MODE_FILTERED, MODE_INTERVENTION):
        raise FormatError(f"unknown decode mode {mode!r}")
    plans = plan_frames(stream.gop_pattern, stream.frame_count)
    by_display = {p.display_index: p for p in plans}

    frames: list[tuple[int, np.ndarray]] = []
    meta: list[MacroblockMeta] = []
    for payload in stream.payloads:
        display = _peek_display_index(payload, stream.frame_count)
        plan = by_display[display]
        if plan.frame_type != "I":
            continue
        recon, grid, frame_meta, _ = _decode_frame(
            payload, plan, stream.width, stream.height, [], stream.frame_count
        )
        if mode == MODE_FILTERED and stream.deblock_enabled:
            recon = deblock_filter(recon, grid)
        frames.append((display, recon.astype(np.uint8)))
        meta.extend(frame_meta)

    frames.sort(key=lambda item: item[0])
    meta.sort(key=lambda m: (m.frame_index, m.y, m.x))
    return DecodeOutput([f for _, f in frames], meta, mode)
