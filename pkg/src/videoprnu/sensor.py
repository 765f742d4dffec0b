"""Synthetic sensor: ground-truth fingerprint and raw video synthesis.

Raw sample model per frame: clip_round(scene * (1 + K) + noise), where K is
the fixed per-pixel sensitivity deviation and the noise term is drawn fresh
each frame. Having K in hand lets every downstream claim be checked against
a known answer instead of a physical camera.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .frameio import RawVideo

SCENE_KINDS = ("gradient", "texture", "mixed")

DEFAULT_K_STRENGTH = 0.03
DEFAULT_THETA_STD = 2.0

# Disjoint sub-stream tags so scene content and per-frame noise never share
# a generator state even though they derive from one user-facing seed.
_SCENE_STREAM = 1
_NOISE_STREAM = 2


def generate_prnu_factor(seed: int, width: int, height: int, k_strength: float) -> np.ndarray:
    """Deterministic zero-mean Gaussian sensitivity map with exact strength.

    The sample is recentred and rescaled so its mean is 0 and its standard
    deviation is exactly ``k_strength``.
    """
    if width <= 0 or height <= 0:
        raise DimensionError("pattern dimensions must be positive")
    if k_strength < 0:
        raise ConfigError("k_strength must be >= 0")
    if k_strength == 0:
        return np.zeros((height, width))
    rng = np.random.default_rng(seed)
    k = rng.standard_normal((height, width))
    k -= k.mean()
    k *= k_strength / k.std()
    return k


@dataclass
class SensorProfile:
    """A simulated sensor: its true fingerprint and noise level."""

    k_true: np.ndarray
    k_strength: float = DEFAULT_K_STRENGTH
    theta_std: float = DEFAULT_THETA_STD

    def __post_init__(self) -> None:
        self.k_true = np.asarray(self.k_true, dtype=np.float64)
        if self.k_true.ndim != 2:
            raise DimensionError("k_true must be a 2-D plane")
        if self.k_strength < 0 or self.theta_std < 0:
            raise ConfigError("k_strength and theta_std must be >= 0")

    @classmethod
    def generate(
        cls,
        seed: int,
        width: int,
        height: int,
        k_strength: float = DEFAULT_K_STRENGTH,
        theta_std: float = DEFAULT_THETA_STD,
    ) -> "SensorProfile":
        return cls(generate_prnu_factor(seed, width, height, k_strength), k_strength, theta_std)

    @property
    def shape(self) -> tuple[int, int]:
        return self.k_true.shape


@dataclass
class SceneConfig:
    """What the simulated camera looks at and how it moves."""

    kind: str = "mixed"
    drift: tuple[float, float] = (1.0, 1.0)  # (dy, dx) pixels per frame
    mean_intensity: float = 128.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in SCENE_KINDS:
            raise ConfigError(f"scene kind must be one of {SCENE_KINDS}, got {self.kind!r}")
        if not 0 < self.mean_intensity < 255:
            raise ConfigError("mean_intensity must be in (0, 255)")


def render_scene(scene: SceneConfig, width: int, height: int) -> np.ndarray:
    """Periodic base content so per-frame drift is a seamless cyclic shift."""
    rng = np.random.default_rng(np.random.SeedSequence([scene.seed, _SCENE_STREAM]))
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)

    gradient = np.zeros((height, width))
    for _ in range(3):
        cy, cx = rng.integers(1, 4), rng.integers(1, 4)
        phase = rng.uniform(0, 2 * np.pi)
        amp = rng.uniform(12.0, 22.0)
        gradient += amp * np.sin(2 * np.pi * (cy * yy / height + cx * xx / width) + phase)

    noise = rng.standard_normal((height, width))
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    band = np.sqrt(fy * fy + fx * fx) <= 0.125
    texture = np.real(np.fft.ifft2(np.fft.fft2(noise) * band))
    texture *= 18.0 / texture.std()

    if scene.kind == "gradient":
        base = gradient
    elif scene.kind == "texture":
        base = texture
    else:
        base = gradient + 0.7 * texture
    return base + scene.mean_intensity


def simulate_frames(
    base_scene: np.ndarray,
    profile: SensorProfile,
    n_frames: int,
    drift: tuple[float, float] = (0.0, 0.0),
    noise_seed: int = 0,
) -> np.ndarray:
    """Apply the sensor model to a drifting base scene; returns uint8 frames."""
    if base_scene.shape != profile.shape:
        raise DimensionError(
            f"scene {base_scene.shape} does not match sensor {profile.shape}"
        )
    if n_frames < 1:
        raise ConfigError("need at least one frame")
    height, width = base_scene.shape
    if abs(drift[0]) >= height or abs(drift[1]) >= width:
        raise ConfigError("per-frame drift must be smaller than the frame")

    children = np.random.SeedSequence([noise_seed, _NOISE_STREAM]).spawn(n_frames)
    frames = np.empty((n_frames, height, width), dtype=np.uint8)
    gain = 1.0 + profile.k_true
    for t in range(n_frames):
        shift = (round(t * drift[0]), round(t * drift[1]))
        scene_t = np.roll(base_scene, shift, axis=(0, 1))
        raw = scene_t * gain
        if profile.theta_std > 0:
            rng = np.random.default_rng(children[t])
            raw = raw + rng.normal(0.0, profile.theta_std, size=(height, width))
        frames[t] = np.clip(np.round(raw), 0, 255).astype(np.uint8)
    return frames


def simulate_video(
    scene: SceneConfig,
    profile: SensorProfile,
    n_frames: int,
    fps: tuple[int, int] = (25, 1),
) -> RawVideo:
    """Render the configured scene and push it through the sensor model."""
    height, width = profile.shape
    base = render_scene(scene, width, height)
    frames = simulate_frames(base, profile, n_frames, scene.drift, noise_seed=scene.seed)
    return RawVideo(width, height, fps[0], fps[1], frames)
