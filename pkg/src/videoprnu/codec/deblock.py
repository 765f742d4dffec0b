"""In-loop deblocking across 4x4 transform-block edges.

Filtering runs over every internal vertical edge left to right, then every
internal horizontal edge top to bottom, in place, with integer arithmetic.
Per 4x4 edge segment the boundary strength is:

* 2 -- either side intra-coded: smooth 3 pixels per side with 5-tap
  (1,2,2,2,1)/8 averages;
* 1 -- either side carries coded residual, or the sides' motion (vector or
  reference) differs: smooth 1 pixel per side with (1,2,1)/4;
* 0 -- otherwise: leave the edge alone.

A position is only filtered when the gradient straight across the edge is
below alpha(qp) = 0.8*qstep(qp) + 2, so real content edges survive while
quantization seams (whose step height scales with qstep) get smoothed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..mbmeta import MB_SIZE

TB = 4  # transform block size


@dataclass
class BlockGrid:
    """Per-4x4-block coding state used for boundary-strength decisions."""

    height: int
    width: int
    intra: np.ndarray = field(init=False)
    has_coeffs: np.ndarray = field(init=False)
    mv: np.ndarray = field(init=False)
    ref: np.ndarray = field(init=False)
    qp: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        nby, nbx = self.height // TB, self.width // TB
        self.intra = np.zeros((nby, nbx), dtype=bool)
        self.has_coeffs = np.zeros((nby, nbx), dtype=bool)
        self.mv = np.zeros((nby, nbx, 2), dtype=np.int32)
        self.ref = np.full((nby, nbx), -1, dtype=np.int32)
        self.qp = np.zeros((nby, nbx), dtype=np.int32)

    def set_macroblock(
        self,
        y: int,
        x: int,
        *,
        intra: bool,
        qp: int,
        mv: tuple[int, int] = (0, 0),
        ref: int = -1,
    ) -> None:
        by, bx = y // TB, x // TB
        n = MB_SIZE // TB
        self.intra[by : by + n, bx : bx + n] = intra
        self.qp[by : by + n, bx : bx + n] = qp
        self.mv[by : by + n, bx : bx + n] = mv
        self.ref[by : by + n, bx : bx + n] = ref

    def set_coded(self, y: int, x: int, coded: bool) -> None:
        self.has_coeffs[y // TB, x // TB] = coded


def _boundary_strength(grid: BlockGrid, p_idx: tuple, q_idx: tuple) -> np.ndarray:
    intra = grid.intra[p_idx] | grid.intra[q_idx]
    coded = grid.has_coeffs[p_idx] | grid.has_coeffs[q_idx]
    motion = (grid.ref[p_idx] != grid.ref[q_idx]) | np.any(
        grid.mv[p_idx] != grid.mv[q_idx], axis=-1
    )
    return np.where(intra, 2, np.where(coded | motion, 1, 0))


def _filter_edges(plane: np.ndarray, grid: BlockGrid, vertical: bool) -> None:
    """Filter all internal edges of one orientation, in place.

    `plane` is the frame for vertical edges and its transpose for horizontal
    ones, so edge columns are always contiguous in the second axis.
    """
    n_lines, length = plane.shape
    lines = np.arange(n_lines)
    seg = lines // TB  # 4x4 segment index along the edge

    for b in range(1, length // TB):
        e = b * TB  # first column on the q side
        if vertical:
            p_idx, q_idx = (seg, b - 1), (seg, b)
        else:
            p_idx, q_idx = (b - 1, seg), (b, seg)
        bs = _boundary_strength(grid, p_idx, q_idx)
        if not bs.any():
            continue
        qp_avg = (grid.qp[p_idx] + grid.qp[q_idx] + 1) // 2
        alpha = 0.8 * 2.0 ** ((qp_avg - 4) / 6.0) + 2.0

        p3, p2, p1, p0, q0, q1, q2, q3 = plane[:, e - 4 : e + 4].astype(np.int64).T
        # Outermost filter support, border-replicated at the frame edge.
        p4 = plane[:, max(e - 5, 0)].astype(np.int64)
        q4 = plane[:, min(e + 4, length - 1)].astype(np.int64)

        grad_ok = np.abs(p0 - q0) < alpha
        strong = (bs == 2) & grad_ok
        weak = (bs == 1) & grad_ok
        if not (strong.any() or weak.any()):
            continue

        new_p0 = np.where(
            strong,
            (p2 + 2 * p1 + 2 * p0 + 2 * q0 + q1 + 4) >> 3,
            np.where(weak, (p1 + 2 * p0 + q0 + 2) >> 2, p0),
        )
        new_q0 = np.where(
            strong,
            (p1 + 2 * p0 + 2 * q0 + 2 * q1 + q2 + 4) >> 3,
            np.where(weak, (p0 + 2 * q0 + q1 + 2) >> 2, q0),
        )
        new_p1 = np.where(strong, (p3 + 2 * p2 + 2 * p1 + 2 * p0 + q0 + 4) >> 3, p1)
        new_q1 = np.where(strong, (p0 + 2 * q0 + 2 * q1 + 2 * q2 + q3 + 4) >> 3, q1)
        new_p2 = np.where(strong, (p4 + 2 * p3 + 2 * p2 + 2 * p1 + p0 + 4) >> 3, p2)
        new_q2 = np.where(strong, (q0 + 2 * q1 + 2 * q2 + 2 * q3 + q4 + 4) >> 3, q2)

        plane[:, e - 3 : e + 3] = np.stack(
            [new_p2, new_p1, new_p0, new_q0, new_q1, new_q2], axis=1
        )


def deblock_filter(frame: np.ndarray, grid: BlockGrid) -> np.ndarray:
    """Return the deblocked copy of an integer reconstruction plane."""
    out = frame.astype(np.int32).copy()
    _filter_edges(out, grid, vertical=True)
    _filter_edges(out.T, grid, vertical=False)
    return out
