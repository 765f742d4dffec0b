"""Cyclic cross-correlation and the peak-to-correlation-energy statistic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.fft import fft2, ifft2

from .errors import DimensionError

DEFAULT_EXCLUSION_HALFWIDTH = 5
MATCH_THRESHOLD = 60.0


@dataclass(frozen=True)
class PceResult:
    peak_corr: float
    pce: float
    peak_location: tuple[int, int]
    exclusion_halfwidth: int

    def matches(self, threshold: float = MATCH_THRESHOLD) -> bool:
        return self.pce >= threshold


def cross_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cyclic cross-correlation plane, normalized by the pixel count.

    Entry (k, l) is the mean over all (i, j) of a[i, j] * b[i+k, j+l] with
    both shifts taken modulo the plane size; (0, 0) is the aligned term.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or a.shape != b.shape:
        raise DimensionError(f"patterns must share one 2-D shape, got {a.shape} vs {b.shape}")
    return np.real(ifft2(np.conj(fft2(a)) * fft2(b))) / a.size


def _exclusion_mask(shape: tuple[int, int], halfwidth: int) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    rows = np.arange(-halfwidth, halfwidth + 1) % shape[0]
    cols = np.arange(-halfwidth, halfwidth + 1) % shape[1]
    mask[np.ix_(rows, cols)] = True
    return mask


def pce(
    test: np.ndarray,
    reference: np.ndarray,
    exclusion_halfwidth: int = DEFAULT_EXCLUSION_HALFWIDTH,
) -> PceResult:
    """Squared aligned correlation over the mean squared off-peak energy.

    The noise floor averages c^2 outside a (2h+1)x(2h+1) window wrapped
    around (0, 0). The reported peak location is the argmax of |c| and is
    diagnostic only; the statistic itself always uses the aligned term.
    """
    plane = cross_correlation(test, reference)
    h, w = plane.shape
    if exclusion_halfwidth < 0 or 2 * exclusion_halfwidth + 1 >= min(h, w):
        raise DimensionError(
            f"exclusion window {2 * exclusion_halfwidth + 1} does not fit a {h}x{w} plane"
        )
    mask = _exclusion_mask(plane.shape, exclusion_halfwidth)
    floor = float(np.mean(plane[~mask] ** 2))
    peak = float(plane[0, 0])
    if floor == 0.0:
        value = 0.0 if peak == 0.0 else float("inf")
    else:
        value = peak * peak / floor
    loc = np.unravel_index(int(np.argmax(np.abs(plane))), plane.shape)
    return PceResult(peak, value, (int(loc[0]), int(loc[1])), exclusion_halfwidth)
