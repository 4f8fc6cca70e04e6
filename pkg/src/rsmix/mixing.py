"""Rigid-subset mixing of two point clouds.

A mix replaces a spatial neighborhood of the base cloud with a rigidly
translated neighborhood of a partner cloud. Neighborhoods are selected
around uniformly chosen query points, either as all points within a radius
drawn from Beta(theta, theta) or as the k nearest with k derived from the
same draw; the partner subset is clamped so at least half of the base cloud
survives (default). Kept base points are untouched and the inserted points
are translated as one block, so both source shapes are preserved.

All randomness flows through an explicit ``numpy.random.Generator``. The
per-mix draw order is fixed and documented (see README): apply coin, base
query index, partner query index, one shared scale draw, one optional
subsampling draw, one optional duplication draw under the fixed-n policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import spatial

NeighborMode = Literal["ball", "knn"]
SizePolicy = Literal["paper", "fixed-n"]


@dataclass(frozen=True)
class MixParams:
    """Knobs for a single mix.

    ``nmax_fraction`` bounds the inserted subset to that fraction of the
    partner cloud; ``apply_prob`` is the chance a mix happens at all (the
    skipped case returns the base sample unchanged with lambda 0).
    ``size_policy`` "paper" emits exactly the kept-plus-inserted points,
    "fixed-n" pads back to the base cloud size by duplicating mixed points.
    """

    neighbor_mode: NeighborMode = "ball"
    theta: float = 1.0
    nmax_fraction: float = 0.5
    apply_prob: float = 0.5
    size_policy: SizePolicy = "paper"

    def __post_init__(self) -> None:
        if self.neighbor_mode not in ("ball", "knn"):
            raise ValueError(f"neighbor_mode must be 'ball' or 'knn', got {self.neighbor_mode!r}")
        if not (np.isfinite(self.theta) and self.theta > 0):
            raise ValueError(f"theta must be a positive real, got {self.theta!r}")
        if not 0 < self.nmax_fraction <= 1:
            raise ValueError(f"nmax_fraction must be in (0, 1], got {self.nmax_fraction!r}")
        if not 0 <= self.apply_prob <= 1:
            raise ValueError(f"apply_prob must be in [0, 1], got {self.apply_prob!r}")
        if self.size_policy not in ("paper", "fixed-n"):
            raise ValueError(f"size_policy must be 'paper' or 'fixed-n', got {self.size_policy!r}")


@dataclass(frozen=True)
class RigidSubset:
    """A neighborhood of one cloud: ascending point indices plus its query point."""

    source: np.ndarray
    indices: np.ndarray
    query_index: int


FROM_BASE = 0
FROM_PARTNER = 1


@dataclass
class MixResult:
    """Outcome of one mix.

    ``provenance`` tags each output point FROM_BASE or FROM_PARTNER;
    ``source_index`` gives the point's index in its source cloud. ``lam``
    is the partner fraction used for label mixing. ``applied`` is False
    when the apply coin skipped the mix; ``degenerate`` marks the case
    where the whole base cloud was extracted and nothing was inserted,
    which also falls back to the unmodified base sample.
    """

    mixed: np.ndarray
    lam: float
    label: np.ndarray
    provenance: np.ndarray
    source_index: np.ndarray
    applied: bool
    degenerate: bool = False
    query_base: int | None = None
    query_partner: int | None = None
    radius: float | None = None
    k: int | None = None


def _check_cloud(cloud: np.ndarray, name: str) -> np.ndarray:
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must be an (n, 3) array, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError(f"empty input: {name} has no points")
    if not np.isfinite(pts).all():
        raise ValueError(f"{name} contains non-finite coordinates")
    return pts


def _check_label(label: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(label, dtype=np.float64).reshape(-1)
    if vec.size == 0:
        raise ValueError(f"{name} is empty")
    return vec


def normalize_unit_sphere(cloud: np.ndarray) -> np.ndarray:
    """Center the cloud at its centroid and scale the farthest point to norm 1.

    A cloud whose points all coincide maps to the origin (scale factor 1).
    Only a translation and one uniform scale are applied, so relative
    geometry is preserved.
    """
    pts = _check_cloud(cloud, "cloud")
    centered = pts - pts.mean(axis=0)
    max_norm = float(np.sqrt(np.max(np.einsum("ij,ij->i", centered, centered))))
    if max_norm == 0.0:
        return centered
    return centered / max_norm


def select_query(cloud: np.ndarray, rng: np.random.Generator) -> int:
    """Uniform random point index; consumes exactly one draw."""
    pts = _check_cloud(cloud, "cloud")
    return int(rng.integers(pts.shape[0]))


def sample_radius(theta: float, rng: np.random.Generator) -> float:
    """Draw the neighborhood radius from Beta(theta, theta).

    theta = 1 is the uniform distribution on (0, 1); larger theta
    concentrates draws around 0.5.
    """
    if not (np.isfinite(theta) and theta > 0):
        raise ValueError(f"theta must be a positive real, got {theta!r}")
    return float(rng.beta(theta, theta))


def _nmax(nmax_fraction: float, n: int) -> int:
    return int(np.floor(nmax_fraction * n))


def _knn_k(scale: float, nmax_fraction: float, n: int) -> int:
    return max(1, int(np.floor(scale * _nmax(nmax_fraction, n))))


def neighbor_subset(
    cloud: np.ndarray,
    q_index: int,
    params: MixParams,
    rng: np.random.Generator,
    role: Literal["alpha", "beta"] = "alpha",
    scale: float | None = None,
    max_size: int | None = None,
    knn_k: int | None = None,
) -> RigidSubset:
    """Select the neighborhood of ``cloud`` around point ``q_index``.

    In ball mode the subset is every point within the radius; in knn mode
    it is the k nearest with k = max(1, floor(scale * n_max)). ``scale``
    is drawn via ``sample_radius(params.theta, rng)`` when not supplied, so
    a caller mixing two clouds can share one draw between them; ``knn_k``
    likewise overrides the derived k so both clouds use the same one. The
    beta role is clamped to n_max = floor(nmax_fraction * n), further
    reduced to ``max_size`` if given, by one uniform subsample without
    replacement. Indices are returned in ascending order.
    """
    pts = _check_cloud(cloud, "cloud")
    n = pts.shape[0]
    if not 0 <= q_index < n:
        raise ValueError(f"q_index {q_index} out of range for cloud of size {n}")
    if scale is None:
        scale = sample_radius(params.theta, rng)

    index = spatial.build_index(pts)
    q = pts[q_index]
    if params.neighbor_mode == "ball":
        raw = spatial.query_radius(index, q, scale)
    else:
        k = knn_k if knn_k is not None else _knn_k(scale, params.nmax_fraction, n)
        raw = np.sort(spatial.query_knn(index, q, min(k, n)))

    if role == "beta":
        target = min(raw.size, _nmax(params.nmax_fraction, n))
        if max_size is not None:
            target = min(target, max_size)
        raw = _subsample(raw, target, rng)
    return RigidSubset(source=pts, indices=raw, query_index=q_index)


def _subsample(indices: np.ndarray, target: int, rng: np.random.Generator) -> np.ndarray:
    # One rng draw iff 0 < target < len(indices); a reduction to zero is
    # draw-free so empty clamps keep the stream aligned.
    if target >= indices.size:
        return indices
    if target == 0:
        return np.empty(0, dtype=np.int64)
    pos = rng.choice(indices.size, size=target, replace=False)
    return np.sort(indices[pos])


def translate_subset(
    subset: RigidSubset, q_alpha: np.ndarray, q_beta: np.ndarray
) -> np.ndarray:
    """Rigidly translate the subset's points by (q_alpha - q_beta)."""
    q_alpha = np.asarray(q_alpha, dtype=np.float64).reshape(3)
    q_beta = np.asarray(q_beta, dtype=np.float64).reshape(3)
    if not (np.isfinite(q_alpha).all() and np.isfinite(q_beta).all()):
        raise ValueError("query points must be finite")
    return subset.source[subset.indices] + (q_alpha - q_beta)


def mixture_ratio(n_alpha_remaining: int, n_beta_subset: int) -> float:
    """Partner fraction of the mixed cloud.

    Zero when nothing of the base cloud remains or nothing is inserted;
    otherwise inserted / (remaining + inserted).
    """
    if n_alpha_remaining < 0 or n_beta_subset < 0:
        raise ValueError("counts must be non-negative")
    if n_alpha_remaining == 0 or n_beta_subset == 0:
        return 0.0
    return n_beta_subset / (n_alpha_remaining + n_beta_subset)


def mix_labels(y_alpha: np.ndarray, y_beta: np.ndarray, lam: float) -> np.ndarray:
    """Blend two label vectors: (1 - lam) * y_alpha + lam * y_beta."""
    a = _check_label(y_alpha, "y_alpha")
    b = _check_label(y_beta, "y_beta")
    if a.shape != b.shape:
        raise ValueError(f"label dimension mismatch: {a.shape} vs {b.shape}")
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must be in [0, 1], got {lam!r}")
    return (1.0 - lam) * a + lam * b


def passthrough(
    cloud_a: np.ndarray, y_a: np.ndarray, applied: bool = False, degenerate: bool = False
) -> MixResult:
    """A no-mix result: the base sample unchanged, lambda 0."""
    n = cloud_a.shape[0]
    return MixResult(
        mixed=cloud_a.copy(),
        lam=0.0,
        label=y_a.copy(),
        provenance=np.zeros(n, dtype=np.uint8),
        source_index=np.arange(n, dtype=np.int64),
        applied=applied,
        degenerate=degenerate,
    )


def mix_pair(
    cloud_a: np.ndarray,
    y_a: np.ndarray,
    cloud_b: np.ndarray,
    y_b: np.ndarray,
    params: MixParams,
    rng: np.random.Generator,
) -> MixResult:
    """Mix ``cloud_b`` into ``cloud_a``.

    Draw order: apply coin, query index into a, query index into b, one
    shared Beta(theta, theta) scale, optional partner subsample, optional
    fixed-n duplication. Output points are the kept base points in their
    original order followed by the translated partner points in ascending
    source order.
    """
    a = _check_cloud(cloud_a, "cloud_a")
    b = _check_cloud(cloud_b, "cloud_b")
    ya = _check_label(y_a, "y_a")
    yb = _check_label(y_b, "y_b")
    if ya.shape != yb.shape:
        raise ValueError(f"label dimension mismatch: {ya.shape} vs {yb.shape}")
    n_a, n_b = a.shape[0], b.shape[0]

    if rng.random() >= params.apply_prob:
        return passthrough(a, ya, applied=False)

    q_a = int(rng.integers(n_a))
    q_b = int(rng.integers(n_b))
    scale = sample_radius(params.theta, rng)

    # One shared scale for both clouds: the same radius in ball mode, and
    # in knn mode one k (derived from the partner cloud's bound) so both
    # subsets have equal size and the mixed cloud keeps exactly n_a points.
    k_shared = None if params.neighbor_mode == "ball" else _knn_k(scale, params.nmax_fraction, n_b)
    sub_a = neighbor_subset(a, q_a, params, rng, role="alpha", scale=scale, knn_k=k_shared)
    limit = sub_a.indices.size if params.neighbor_mode == "ball" else None
    sub_b = neighbor_subset(
        b, q_b, params, rng, role="beta", scale=scale, max_size=limit, knn_k=k_shared
    )

    keep = np.setdiff1d(np.arange(n_a, dtype=np.int64), sub_a.indices, assume_unique=True)
    if keep.size == 0 and sub_b.indices.size == 0:
        return passthrough(a, ya, applied=True, degenerate=True)

    moved = translate_subset(sub_b, a[q_a], b[q_b])
    mixed = np.concatenate([a[keep], moved])
    provenance = np.concatenate(
        [
            np.full(keep.size, FROM_BASE, dtype=np.uint8),
            np.full(sub_b.indices.size, FROM_PARTNER, dtype=np.uint8),
        ]
    )
    source_index = np.concatenate([keep, sub_b.indices])
    lam = mixture_ratio(keep.size, sub_b.indices.size)

    if params.size_policy == "fixed-n" and mixed.shape[0] < n_a:
        pad = rng.integers(0, mixed.shape[0], size=n_a - mixed.shape[0])
        mixed = np.concatenate([mixed, mixed[pad]])
        provenance = np.concatenate([provenance, provenance[pad]])
        source_index = np.concatenate([source_index, source_index[pad]])

    result = MixResult(
        mixed=mixed,
        lam=lam,
        label=mix_labels(ya, yb, lam),
        provenance=provenance,
        source_index=source_index,
        applied=True,
        query_base=q_a,
        query_partner=q_b,
    )
    if params.neighbor_mode == "ball":
        result.radius = scale
    else:
        result.k = k_shared
    return result
