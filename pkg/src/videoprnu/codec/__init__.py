"""Reference block codec: transform, prediction, deblocking, entropy coding."""

from .bitstream import Bitstream, read_bitstream, write_bitstream
from .decoder import (
    MODE_FILTERED,
    MODE_INTERVENTION,
    DecodeOutput,
    decode,
    decode_both,
    decode_i_frames_only,
)
from .deblock import BlockGrid, deblock_filter
from .encoder import EncoderConfig, encode, encode_full, rate_control_step
from .gop import FramePlan, decode_order, plan_frames
from .predict import full_search, intra_prediction
from .transform import (
    dequantize,
    forward_transform_4x4,
    inverse_transform_4x4,
    qp_to_qstep,
    quantize,
)

__all__ = [
    "Bitstream",
    "BlockGrid",
    "DecodeOutput",
    "EncoderConfig",
    "FramePlan",
    "MODE_FILTERED",
    "MODE_INTERVENTION",
    "decode",
    "decode_both",
    "decode_i_frames_only",
    "decode_order",
    "deblock_filter",
    "dequantize",
    "encode",
    "encode_full",
    "forward_transform_4x4",
    "full_search",
    "intra_prediction",
    "inverse_transform_4x4",
    "plan_frames",
    "qp_to_qstep",
    "quantize",
    "rate_control_step",
    "read_bitstream",
    "write_bitstream",
]
