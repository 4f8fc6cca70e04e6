"""Conventional point-cloud augmentations and robustness transforms.

Jitter, uniform rescale, rotation about a coordinate axis, whole-cloud
shift, and point dropout. Every op preserves the point count and takes an
explicit ``numpy.random.Generator``; rotations use a right-handed frame
with positive angles counterclockwise when looking down the axis toward
the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STAGES = ("jitter", "scale", "rotate-y", "shift", "drop")

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ConvDAConfig:
    jitter_sigma: float = 0.01
    jitter_clip: float = 0.05
    scale_lo: float = 0.8
    scale_hi: float = 1.25
    rotate_y: bool = True
    shift_range: float = 0.1
    drop_max_ratio: float = 0.875

    def __post_init__(self) -> None:
        if self.jitter_sigma < 0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma!r}")
        if self.jitter_clip < 0:
            raise ValueError(f"jitter_clip must be >= 0, got {self.jitter_clip!r}")
        if not 0 < self.scale_lo <= self.scale_hi:
            raise ValueError(
                f"need 0 < scale_lo <= scale_hi, got ({self.scale_lo!r}, {self.scale_hi!r})"
            )
        if self.shift_range < 0:
            raise ValueError(f"shift_range must be >= 0, got {self.shift_range!r}")
        if not 0 <= self.drop_max_ratio < 1:
            raise ValueError(f"drop_max_ratio must be in [0, 1), got {self.drop_max_ratio!r}")


def _check_cloud(cloud: np.ndarray) -> np.ndarray:
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array, got shape {pts.shape}")
    return pts


def jitter(
    cloud: np.ndarray, sigma: float, clip: float, rng: np.random.Generator
) -> np.ndarray:
    """Perturb each coordinate by Gaussian noise truncated to [-clip, clip]."""
    pts = _check_cloud(cloud)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma!r}")
    if clip < 0:
        raise ValueError(f"clip must be >= 0, got {clip!r}")
    noise = np.clip(rng.normal(0.0, sigma, pts.shape), -clip, clip)
    return pts + noise


def random_scale(
    cloud: np.ndarray, lo: float, hi: float, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Multiply the cloud by one uniform factor from [lo, hi]; returns it too."""
    pts = _check_cloud(cloud)
    if not 0 < lo <= hi:
        raise ValueError(f"need 0 < lo <= hi, got ({lo!r}, {hi!r})")
    s = float(rng.uniform(lo, hi))
    return pts * s, s


def _rotation_matrix(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    if axis == "x":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)
    if axis == "y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)
    if axis == "z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)
    raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")


def rotate_axis(cloud: np.ndarray, axis: str, angle: float) -> np.ndarray:
    """Rotate the cloud about a coordinate axis by ``angle`` radians."""
    pts = _check_cloud(cloud)
    if not np.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    return pts @ _rotation_matrix(axis, angle).T


def rotate_y(cloud: np.ndarray, angle: float) -> np.ndarray:
    """Rotate about the vertical (gravity) axis."""
    return rotate_axis(cloud, "y", angle)


def random_shift(cloud: np.ndarray, shift_range: float, rng: np.random.Generator) -> np.ndarray:
    """Add one uniform offset from [-shift_range, shift_range]^3 to all points."""
    pts = _check_cloud(cloud)
    if shift_range < 0:
        raise ValueError(f"shift_range must be >= 0, got {shift_range!r}")
    return pts + rng.uniform(-shift_range, shift_range, size=3)


def drop_points(cloud: np.ndarray, ratio: float, rng: np.random.Generator) -> np.ndarray:
    """Replace floor(ratio * n) uniformly chosen points with the first survivor.

    The count stays n and no new coordinates are invented; ratio < 1 so at
    least one point always survives.
    """
    pts = _check_cloud(cloud)
    if not 0 <= ratio < 1:
        raise ValueError(f"ratio must be in [0, 1), got {ratio!r}")
    n = pts.shape[0]
    m = int(np.floor(ratio * n))
    out = pts.copy()
    if m == 0:
        return out
    dropped = rng.choice(n, size=m, replace=False)
    survivors = np.setdiff1d(np.arange(n), dropped, assume_unique=True)
    out[dropped] = pts[survivors[0]]
    return out


def random_drop(cloud: np.ndarray, max_ratio: float, rng: np.random.Generator) -> np.ndarray:
    """Drop a uniformly drawn fraction of points, up to ``max_ratio``."""
    if not 0 <= max_ratio < 1:
        raise ValueError(f"max_ratio must be in [0, 1), got {max_ratio!r}")
    ratio = float(rng.uniform(0.0, max_ratio))
    return drop_points(cloud, ratio, rng)


def apply_stages(
    cloud: np.ndarray,
    config: ConvDAConfig,
    stages: tuple[str, ...],
    rng: np.random.Generator,
) -> np.ndarray:
    """Apply the named stages in order, consuming draws in that same order.

    Stage draws: jitter one normal array, scale one uniform, rotate-y one
    uniform angle in [0, 2*pi), shift three uniforms, drop one uniform
    ratio plus one choice when any point is dropped.
    """
    pts = _check_cloud(cloud)
    for stage in stages:
        if stage == "jitter":
            pts = jitter(pts, config.jitter_sigma, config.jitter_clip, rng)
        elif stage == "scale":
            pts, _ = random_scale(pts, config.scale_lo, config.scale_hi, rng)
        elif stage == "rotate-y":
            pts = rotate_y(pts, float(rng.uniform(0.0, _TWO_PI)))
        elif stage == "shift":
            pts = random_shift(pts, config.shift_range, rng)
        elif stage == "drop":
            pts = random_drop(pts, config.drop_max_ratio, rng)
        else:
            raise ValueError(f"unknown augmentation stage {stage!r}")
    return pts
