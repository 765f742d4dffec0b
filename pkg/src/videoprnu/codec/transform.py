"""4x4 block transform and QP-indexed quantization.

The core transform is the 4x4 integer matrix used by block codecs, with the
orthonormalizing scale applied explicitly as a real-valued factor instead of
being folded into quantization tables. That keeps quantization error directly
analyzable: levels are plain rounded coefficient/step ratios.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError

QP_MIN = 1
QP_MAX = 51

# Core transform: rows have squared norms (4, 10, 4, 10).
CORE = np.array(
    [
        [1, 1, 1, 1],
        [2, 1, -1, -2],
        [1, -1, -1, 1],
        [1, -2, 2, -1],
    ],
    dtype=np.float64,
)

_ROW_SCALE = 1.0 / np.sqrt(np.sum(CORE * CORE, axis=1))
# Outer product of per-row scales; applying it once after the forward pass
# and once before the inverse pass makes forward/inverse an exact pair.
SCALE = np.outer(_ROW_SCALE, _ROW_SCALE)

# Zigzag scan order for a 4x4 coefficient block.
ZIGZAG = [
    (0, 0), (0, 1), (1, 0), (2, 0),
    (1, 1), (0, 2), (0, 3), (1, 2),
    (2, 1), (3, 0), (3, 1), (2, 2),
    (1, 3), (2, 3), (3, 2), (3, 3),
]


def check_qp(qp: int) -> None:
    if not QP_MIN <= qp <= QP_MAX:
        raise ConfigError(f"qp must be in [{QP_MIN}, {QP_MAX}], got {qp}")


def qp_to_qstep(qp: int) -> float:
    """Quantizer step for a QP: 1.0 at QP 4, doubling for every +6."""
    check_qp(qp)
    return float(2.0 ** ((qp - 4) / 6.0))


def forward_transform_4x4(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (4, 4):
        raise ConfigError(f"expected a 4x4 block, got shape {block.shape}")
    return (CORE @ block @ CORE.T) * SCALE


def inverse_transform_4x4(coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (4, 4):
        raise ConfigError(f"expected a 4x4 block, got shape {coeffs.shape}")
    return CORE.T @ (coeffs * SCALE) @ CORE


def forward_transform_blocks(blocks: np.ndarray) -> np.ndarray:
    """Vectorized forward transform over an (..., 4, 4) stack."""
    return np.einsum("ij,...jk,lk->...il", CORE, blocks.astype(np.float64), CORE) * SCALE


def inverse_transform_blocks(coeffs: np.ndarray) -> np.ndarray:
    """Vectorized inverse transform over an (..., 4, 4) stack."""
    return np.einsum("ji,...jk,kl->...il", CORE, coeffs * SCALE, CORE)


def quantize(coeffs: np.ndarray, qp: int) -> np.ndarray:
    """Round coefficients to integer multiples of the QP's step size."""
    qstep = qp_to_qstep(qp)
    return np.round(np.asarray(coeffs, dtype=np.float64) / qstep).astype(np.int64)


def dequantize(levels: np.ndarray, qp: int) -> np.ndarray:
    qstep = qp_to_qstep(qp)
    return np.asarray(levels, dtype=np.float64) * qstep
