"""Noise-residue extraction via wavelet-domain locally adaptive Wiener filtering.

The denoiser runs a 4-level separable orthonormal wavelet decomposition
(8-tap Daubechies filters, periodic boundary) and shrinks every detail
coefficient by the Wiener factor s2/(s2 + sigma2), where s2 is the local
signal variance estimated as the minimum over 3/5/7/9 square windows of the
local coefficient energy minus the noise floor sigma2 = 4. The residue is
the frame minus its denoised version; it keeps the flat noise-like part of
the spectrum where the sensor pattern lives.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import DimensionError

NOISE_VAR = 4.0  # intensity units squared
WIENER_WINDOWS = (3, 5, 7, 9)
DWT_LEVELS = 4
MIN_SIDE = 32

# Daubechies length-8 scaling filter; the wavelet filter is its
# alternating-sign reverse (quadrature mirror).
DB4_LO = np.array(
    [
        0.23037781330885523,
        0.7148465705525415,
        0.6308807679295904,
        -0.02798376941698385,
        -0.18703481171888114,
        0.030841381835986965,
        0.032883011666982945,
        -0.010597401784997278,
    ]
)
DB4_HI = (-1.0) ** np.arange(8) * DB4_LO[::-1]


def _analyze(x: np.ndarray, filt: np.ndarray, axis: int) -> np.ndarray:
    """Periodic filter-and-downsample along one axis."""
    acc = np.zeros_like(x)
    for n, c in enumerate(filt):
        acc += c * np.roll(x, -n, axis=axis)
    idx = np.arange(0, x.shape[axis], 2)
    return acc.take(idx, axis=axis)


def _synthesize(y: np.ndarray, filt: np.ndarray, axis: int, size: int) -> np.ndarray:
    """Upsample-and-filter adjoint of :func:`_analyze`."""
    shape = list(y.shape)
    shape[axis] = size
    z = np.zeros(shape, dtype=y.dtype)
    sl = [slice(None)] * y.ndim
    sl[axis] = slice(0, size, 2)
    z[tuple(sl)] = y
    acc = np.zeros_like(z)
    for n, c in enumerate(filt):
        acc += c * np.roll(z, n, axis=axis)
    return acc


def dwt2(plane: np.ndarray, levels: int = DWT_LEVELS) -> tuple[np.ndarray, list[tuple]]:
    """Decompose into an approximation plus per-level (LH, HL, HH) details.

    Details are ordered finest first. Dimensions must stay even at every
    level, i.e. be divisible by 2**levels.
    """
    h, w = plane.shape
    div = 1 << levels
    if h % div or w % div:
        raise DimensionError(f"plane {h}x{w} not divisible by {div} for {levels} wavelet levels")
    approx = plane.astype(np.float64)
    details = []
    for _ in range(levels):
        lo = _analyze(approx, DB4_LO, axis=0)
        hi = _analyze(approx, DB4_HI, axis=0)
        ll = _analyze(lo, DB4_LO, axis=1)
        lh = _analyze(lo, DB4_HI, axis=1)
        hl = _analyze(hi, DB4_LO, axis=1)
        hh = _analyze(hi, DB4_HI, axis=1)
        details.append((lh, hl, hh))
        approx = ll
    return approx, details


def idwt2(approx: np.ndarray, details: list[tuple]) -> np.ndarray:
    """Inverse of :func:`dwt2`."""
    out = approx
    for lh, hl, hh in reversed(details):
        h2, w2 = lh.shape
        lo = _synthesize(out, DB4_LO, axis=1, size=2 * w2) + _synthesize(
            lh, DB4_HI, axis=1, size=2 * w2
        )
        hi = _synthesize(hl, DB4_LO, axis=1, size=2 * w2) + _synthesize(
            hh, DB4_HI, axis=1, size=2 * w2
        )
        out = _synthesize(lo, DB4_LO, axis=0, size=2 * h2) + _synthesize(
            hi, DB4_HI, axis=0, size=2 * h2
        )
    return out


def noise_gain(values: np.ndarray, noise_var: float, windows=WIENER_WINDOWS) -> np.ndarray:
    """Pointwise Wiener gain of the noise component, in (0, 1].

    Local signal variance is the smallest windowed energy estimate after
    subtracting the noise floor, clamped at zero.
    """
    energy = values * values
    signal_var = None
    for win in windows:
        est = uniform_filter(energy, win, mode="reflect")
        signal_var = est if signal_var is None else np.minimum(signal_var, est)
    signal_var = np.maximum(signal_var - noise_var, 0.0)
    return noise_var / (signal_var + noise_var)


def denoise(frame: np.ndarray, noise_var: float = NOISE_VAR) -> np.ndarray:
    """Wavelet-domain Wiener denoising; preserves constants exactly."""
    approx, details = dwt2(np.asarray(frame, dtype=np.float64))
    shrunk = []
    for lh, hl, hh in details:
        shrunk.append(tuple(band * (1.0 - noise_gain(band, noise_var)) for band in (lh, hl, hh)))
    return idwt2(approx, shrunk)


def extract_residue(frame: np.ndarray, noise_var: float = NOISE_VAR) -> np.ndarray:
    """Frame minus its denoised version."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise DimensionError("expected a single 2-D plane")
    if min(frame.shape) < MIN_SIDE:
        raise DimensionError(
            f"frame {frame.shape} smaller than the {MIN_SIDE}x{MIN_SIDE} denoiser minimum"
        )
    return frame - denoise(frame)
