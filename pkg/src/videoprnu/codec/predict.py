"""Intra extrapolation and full-search motion estimation for 16x16 macroblocks.

Intra prediction reads UNFILTERED reconstructed neighbors of the current
frame; inter prediction reads deblocked reference frames. Both sides of the
codec call the same functions, which is what keeps them in lockstep.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..mbmeta import MB_SIZE as MB

INTRA_DC = 0
INTRA_H = 1
INTRA_V = 2
INTRA_MODES = (INTRA_DC, INTRA_H, INTRA_V)


def intra_prediction(recon: np.ndarray, mby: int, mbx: int, mode: int) -> np.ndarray:
    """Predict one macroblock from its unfiltered top/left neighbors.

    Macroblocks missing a top or left neighbor (frame border) always predict
    the flat mid-level 128, whatever mode was signaled.
    """
    if mby == 0 or mbx == 0:
        return np.full((MB, MB), 128, dtype=np.int32)
    top = recon[mby - 1, mbx : mbx + MB].astype(np.int64)
    left = recon[mby : mby + MB, mbx - 1].astype(np.int64)
    if mode == INTRA_H:
        return np.repeat(left, MB).reshape(MB, MB).astype(np.int32)
    if mode == INTRA_V:
        return np.tile(top, (MB, 1)).astype(np.int32)
    dc = int((top.sum() + left.sum() + MB) // (2 * MB))
    return np.full((MB, MB), dc, dtype=np.int32)


def choose_intra_mode(
    recon: np.ndarray, original_block: np.ndarray, mby: int, mbx: int
) -> tuple[int, np.ndarray, int]:
    """Pick the intra mode with the lowest SSE against the original block.

    Returns (mode, prediction, sse). Border macroblocks are pinned to DC.
    """
    original = original_block.astype(np.int64)
    if mby == 0 or mbx == 0:
        pred = intra_prediction(recon, mby, mbx, INTRA_DC)
        sse = int(((original - pred) ** 2).sum())
        return INTRA_DC, pred, sse
    best = None
    for mode in INTRA_MODES:
        pred = intra_prediction(recon, mby, mbx, mode)
        sse = int(((original - pred) ** 2).sum())
        if best is None or sse < best[2]:
            best = (mode, pred, sse)
    return best


def mc_prediction(reference: np.ndarray, mby: int, mbx: int, mv: tuple[int, int]) -> np.ndarray:
    """Motion-compensated block copy at integer-pel displacement (dy, dx)."""
    dy, dx = mv
    y, x = mby + dy, mbx + dx
    return reference[y : y + MB, x : x + MB].astype(np.int32)


def full_search(
    reference: np.ndarray, block: np.ndarray, mby: int, mbx: int, search_range: int
) -> tuple[tuple[int, int], int]:
    """Exhaustive integer-pel search minimizing SSE over +/- search_range.

    Candidate displacements are clamped so the reference block stays inside
    the frame. Ties go to the smallest displacement norm, then raster order.
    Returns ((dy, dx), sse).
    """
    h, w = reference.shape
    y0 = max(0, mby - search_range)
    y1 = min(h - MB, mby + search_range)
    x0 = max(0, mbx - search_range)
    x1 = min(w - MB, mbx + search_range)
    window = reference[y0 : y1 + MB, x0 : x1 + MB]
    candidates = sliding_window_view(window, (MB, MB))  # (ny, nx, MB, MB)
    diff = candidates.astype(np.int64) - block.astype(np.int64)[None, None]
    sse = np.einsum("yxij,yxij->yx", diff, diff)

    best_sse = int(sse.min())
    ties = np.argwhere(sse == best_sse)
    best = None
    for iy, ix in ties:
        dy = y0 + int(iy) - mby
        dx = x0 + int(ix) - mbx
        key = (dy * dy + dx * dx, dy, dx)
        if best is None or key < best[0]:
            best = (key, (dy, dx))
    return best[1], best_sse
