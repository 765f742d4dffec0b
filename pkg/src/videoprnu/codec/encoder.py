"""Block-based reference encoder.

The encoder keeps two reconstruction buffers per frame, exactly like the
decoder: deblocked planes feed motion-compensated prediction, unfiltered
planes feed intra prediction within the running frame. Rate control, when
enabled, nudges the per-frame QP after every coded frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError
from ..frameio import RawVideo
from ..mbmeta import MB_SIZE, MacroblockMeta
from .bits import BitWriter
from .bitstream import FRAME_TYPE_CODES, Bitstream
from .common import code_residual, decode_residual, reconstruct_mb, write_coeff_block
from .deblock import TB, BlockGrid, deblock_filter
from .gop import decode_order, plan_frames, validate_gop_pattern
from .predict import choose_intra_mode, full_search, mc_prediction
from .transform import QP_MAX, QP_MIN, check_qp

RATE_GAIN = 2.0  # qp steps per octave of bit overshoot
MAX_QP_STEP = 3

CONST_QP = "const_qp"
TARGET_BITRATE = "bitrate"


@dataclass
class EncoderConfig:
    gop_pattern: str = "IBP"
    rate_mode: str = CONST_QP
    qp: int = 20
    target_bitrate: float | None = None  # bits per second
    search_range: int = 8
    deblock_enabled: bool = True

    def validate(self) -> None:
        validate_gop_pattern(self.gop_pattern)
        check_qp(self.qp)
        if self.search_range < 0:
            raise ConfigError("search_range must be >= 0")
        if self.rate_mode not in (CONST_QP, TARGET_BITRATE):
            raise ConfigError(f"unknown rate mode {self.rate_mode!r}")
        if self.rate_mode == TARGET_BITRATE:
            if self.target_bitrate is None or self.target_bitrate <= 0:
                raise ConfigError("bitrate mode needs a positive target_bitrate")


def rate_control_step(target_bits_per_frame: float, actual_bits: int, current_qp: int) -> int:
    """Proportional QP update, at most +/-3 per frame, clamped to [1, 51]."""
    ratio = max(actual_bits, 1) / target_bits_per_frame
    step = round(RATE_GAIN * math.log2(ratio))
    step = max(-MAX_QP_STEP, min(MAX_QP_STEP, step))
    return max(QP_MIN, min(QP_MAX, current_qp + step))


def _encode_frame(
    frame: np.ndarray,
    frame_type: str,
    display_index: int,
    qp: int,
    refs: list[tuple[int, np.ndarray]],
    search_range: int,
) -> tuple[bytes, np.ndarray, BlockGrid, list[MacroblockMeta]]:
    """Code one frame; returns (payload, unfiltered recon, grid, meta rows)."""
    height, width = frame.shape
    writer = BitWriter()
    writer.write_ue(display_index)
    writer.write_ue(FRAME_TYPE_CODES[frame_type])
    writer.write_ue(qp - 1)

    recon = np.zeros((height, width), dtype=np.int32)
    grid = BlockGrid(height, width)
    meta: list[MacroblockMeta] = []

    for mby in range(0, height, MB_SIZE):
        for mbx in range(0, width, MB_SIZE):
            start_bit = writer.bit_position
            original = frame[mby : mby + MB_SIZE, mbx : mbx + MB_SIZE]
            writer.write_se(0)  # per-MB qp delta, reserved

            intra_mode, intra_pred, intra_sse = choose_intra_mode(recon, original, mby, mbx)
            use_intra = True
            ref_sel, mv, inter_pred = 0, (0, 0), None
            if frame_type != "I" and refs:
                best = None
                for sel, (_, ref_plane) in enumerate(refs):
                    cand_mv, sse = full_search(ref_plane, original, mby, mbx, search_range)
                    if best is None or sse < best[0]:
                        best = (sse, sel, cand_mv)
                inter_sse, ref_sel, mv = best
                use_intra = intra_sse < inter_sse
                writer.write_ue(1 if use_intra else 0)
                if not use_intra:
                    inter_pred = mc_prediction(refs[ref_sel][1], mby, mbx, mv)

            if use_intra:
                writer.write_ue(intra_mode)
                pred = intra_pred
                mb_type = "I"
            else:
                if frame_type == "B" and len(refs) > 1:
                    writer.write_ue(ref_sel)
                writer.write_se(mv[0])
                writer.write_se(mv[1])
                pred = inter_pred
                mb_type = frame_type

            residual = original.astype(np.int64) - pred
            levels = code_residual(residual, qp)
            for by in range(4):
                for bx in range(4):
                    write_coeff_block(writer, levels[by, bx])
                    grid.set_coded(mby + TB * by, mbx + TB * bx, bool(levels[by, bx].any()))

            coded_residual = decode_residual(levels, qp)
            recon[mby : mby + MB_SIZE, mbx : mbx + MB_SIZE] = reconstruct_mb(pred, coded_residual)
            grid.set_macroblock(
                mby,
                mbx,
                intra=use_intra,
                qp=qp,
                mv=mv if not use_intra else (0, 0),
                ref=refs[ref_sel][0] if not use_intra else -1,
            )
            meta.append(
                MacroblockMeta(
                    frame_index=display_index,
                    x=mbx,
                    y=mby,
                    width=MB_SIZE,
                    height=MB_SIZE,
                    mb_type=mb_type,
                    qp=qp,
                    bits=writer.bit_position - start_bit,
                    residual_energy=float((residual * residual).sum()),
                )
            )

    return writer.getvalue(), recon, grid, meta


def _resolve_refs(plan, filtered: dict[int, np.ndarray]) -> list[tuple[int, np.ndarray]]:
    refs = []
    if plan.past_ref is not None:
        refs.append((plan.past_ref, filtered[plan.past_ref]))
    if plan.future_ref is not None:
        refs.append((plan.future_ref, filtered[plan.future_ref]))
    return refs


def encode_full(
    video: RawVideo, config: EncoderConfig
) -> tuple[Bitstream, list[MacroblockMeta], list[np.ndarray], list[np.ndarray]]:
    """Encode and also return the internal (filtered, unfiltered) recons.

    The reconstruction lists are in display order; the filtered one is what
    a standard decode must reproduce bit-exactly.
    """
    config.validate()
    if video.width % MB_SIZE or video.height % MB_SIZE:
        raise DimensionError("video dimensions must be multiples of 16")

    plans = plan_frames(config.gop_pattern, video.n_frames)
    order = decode_order(plans)

    filtered: dict[int, np.ndarray] = {}
    unfiltered: dict[int, np.ndarray] = {}
    payloads: list[bytes] = []
    meta: list[MacroblockMeta] = []

    qp = config.qp
    target_bpf = None
    if config.rate_mode == TARGET_BITRATE:
        target_bpf = config.target_bitrate * video.fps_den / video.fps_num

    for display in order:
        plan = plans[display]
        frame = video.frames[display].astype(np.int64)
        refs = _resolve_refs(plan, filtered)
        payload, recon, grid, frame_meta = _encode_frame(
            frame, plan.frame_type, display, qp, refs, config.search_range
        )
        unfiltered[display] = recon
        filtered[display] = deblock_filter(recon, grid) if config.deblock_enabled else recon.copy()
        payloads.append(payload)
        meta.extend(frame_meta)
        if target_bpf is not None:
            qp = rate_control_step(target_bpf, 8 * len(payload), qp)

    meta.sort(key=lambda m: (m.frame_index, m.y, m.x))
    stream = Bitstream(
        video.width,
        video.height,
        video.fps_num,
        video.fps_den,
        config.gop_pattern,
        config.deblock_enabled,
        payloads,
    )
    n = video.n_frames
    return stream, meta, [filtered[i] for i in range(n)], [unfiltered[i] for i in range(n)]


def encode(video: RawVideo, config: EncoderConfig) -> tuple[Bitstream, list[MacroblockMeta]]:
    """Encode a raw video; returns the coded stream and per-MB metadata."""
    stream, meta, _, _ = encode_full(video, config)
    return stream, meta
