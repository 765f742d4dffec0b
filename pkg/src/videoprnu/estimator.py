"""Weighted maximum-likelihood fingerprint estimation and post-processing.

The running estimate keeps two planes: a numerator accumulating
frame * residue * weight and a denominator accumulating frame^2 * weight.
With all-ones weights this is exactly the classic unweighted estimator;
per-pixel weights generalize the binary compression mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.fft import fft2, ifft2

from .denoise import extract_residue, noise_gain
from .errors import ConfigError, DimensionError

FINALIZE_EPS = 1e-6


@dataclass
class Accumulator:
    numerator: np.ndarray
    denominator: np.ndarray
    n_frames: int = 0

    @classmethod
    def empty(cls, height: int, width: int) -> "Accumulator":
        if height <= 0 or width <= 0:
            raise DimensionError("accumulator dimensions must be positive")
        return cls(np.zeros((height, width)), np.zeros((height, width)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.numerator.shape

    def merge(self, other: "Accumulator") -> "Accumulator":
        """Combine two partial accumulations (parallel map-reduce support)."""
        if self.shape != other.shape:
            raise DimensionError("cannot merge accumulators of different shapes")
        return Accumulator(
            self.numerator + other.numerator,
            self.denominator + other.denominator,
            self.n_frames + other.n_frames,
        )


def accumulate(
    acc: Accumulator,
    frame: np.ndarray,
    residue: np.ndarray,
    weights: np.ndarray | None = None,
) -> Accumulator:
    """Add one frame's contribution in place; returns the accumulator."""
    frame = np.asarray(frame, dtype=np.float64)
    residue = np.asarray(residue, dtype=np.float64)
    if frame.shape != acc.shape or residue.shape != acc.shape:
        raise DimensionError(
            f"frame {frame.shape} / residue {residue.shape} do not match accumulator {acc.shape}"
        )
    if weights is None:
        acc.numerator += frame * residue
        acc.denominator += frame * frame
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != acc.shape:
            raise DimensionError(f"weights {weights.shape} do not match accumulator {acc.shape}")
        if np.any(weights < 0):
            raise ConfigError("weights must be non-negative")
        acc.numerator += frame * residue * weights
        acc.denominator += frame * frame * weights
    acc.n_frames += 1
    return acc


def finalize(acc: Accumulator) -> np.ndarray:
    """Pixelwise numerator/denominator; zero-weight pixels come out as 0."""
    if acc.n_frames < 1:
        raise ConfigError("cannot finalize an empty accumulator")
    return acc.numerator / np.maximum(acc.denominator, FINALIZE_EPS)


def zero_mean(pattern: np.ndarray) -> np.ndarray:
    """Remove every row mean, then every column mean."""
    pattern = np.asarray(pattern, dtype=np.float64)
    out = pattern - pattern.mean(axis=1, keepdims=True)
    out -= out.mean(axis=0, keepdims=True)
    return out


def wiener_fft(pattern: np.ndarray) -> np.ndarray:
    """Suppress structured spectral peaks, keeping the flat noise spectrum.

    The Fourier magnitude is Wiener-filtered with the pattern's own variance
    as the noise power; each bin keeps only its estimated noise share, so
    periodic artifacts (spectral peaks) are attenuated while a white pattern
    passes nearly unchanged. Output energy never exceeds input energy.
    """
    pattern = np.asarray(pattern, dtype=np.float64)
    n = pattern.size
    if n == 0:
        raise DimensionError("empty pattern")
    noise_var = float(pattern.var(ddof=1)) if n > 1 else 0.0
    if noise_var == 0.0:
        return np.zeros_like(pattern)
    spectrum = fft2(pattern)
    magnitude = np.abs(spectrum) / np.sqrt(n)
    gain = noise_gain(magnitude, noise_var)
    return np.real(ifft2(spectrum * gain))


def postprocess(pattern: np.ndarray) -> np.ndarray:
    """Standard artifact removal: zero-mean rows/columns, then spectral Wiener."""
    return wiener_fft(zero_mean(pattern))


def single_frame_pattern(frame: np.ndarray) -> np.ndarray:
    """Full estimation chain applied to a single frame."""
    frame = np.asarray(frame, dtype=np.float64)
    acc = Accumulator.empty(*frame.shape)
    accumulate(acc, frame, extract_residue(frame))
    return postprocess(finalize(acc))
