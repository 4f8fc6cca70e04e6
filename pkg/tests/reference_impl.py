"""Straight-line reimplementation of the mix, used as a test oracle.

No spatial index, no library imports: neighborhoods come from direct
per-point distance scans and selection is done with plain Python sorts.
The random draw sequence matches the documented one (apply coin, two query
indices, one shared scale, optional subsample, optional fixed-n pad) so
results must agree with the production path bit for bit.
"""

from __future__ import annotations

import math

import numpy as np


def _scan_d2(points: np.ndarray, q: np.ndarray) -> list[float]:
    out = []
    for p in points:
        dx = float(p[0]) - float(q[0])
        dy = float(p[1]) - float(q[1])
        dz = float(p[2]) - float(q[2])
        out.append(dx * dx + dy * dy + dz * dz)
    return out


def _ball_scan(points: np.ndarray, q: np.ndarray, r: float) -> list[int]:
    r2 = r * r
    return [i for i, d2 in enumerate(_scan_d2(points, q)) if d2 <= r2]


def _knn_scan(points: np.ndarray, q: np.ndarray, k: int) -> list[int]:
    d2 = _scan_d2(points, q)
    ranked = sorted(range(len(points)), key=lambda i: (d2[i], i))
    return sorted(ranked[:k])


def reference_mix(
    cloud_a: np.ndarray,
    y_a: np.ndarray,
    cloud_b: np.ndarray,
    y_b: np.ndarray,
    *,
    neighbor_mode: str,
    theta: float,
    nmax_fraction: float,
    apply_prob: float,
    size_policy: str,
    rng: np.random.Generator,
) -> dict:
    a = np.asarray(cloud_a, dtype=np.float64)
    b = np.asarray(cloud_b, dtype=np.float64)
    ya = np.asarray(y_a, dtype=np.float64)
    yb = np.asarray(y_b, dtype=np.float64)
    n_a, n_b = a.shape[0], b.shape[0]

    def unchanged(applied: bool, degenerate: bool = False) -> dict:
        return {
            "mixed": a.copy(),
            "lam": 0.0,
            "label": ya.copy(),
            "provenance": np.zeros(n_a, dtype=np.uint8),
            "source_index": np.arange(n_a, dtype=np.int64),
            "applied": applied,
            "degenerate": degenerate,
        }

    if rng.random() >= apply_prob:
        return unchanged(applied=False)

    q_a = int(rng.integers(n_a))
    q_b = int(rng.integers(n_b))
    scale = float(rng.beta(theta, theta))

    nmax_b = math.floor(nmax_fraction * n_b)
    if neighbor_mode == "ball":
        sub_a = _ball_scan(a, a[q_a], scale)
        raw_b = _ball_scan(b, b[q_b], scale)
    else:
        k = max(1, math.floor(scale * nmax_b))
        sub_a = _knn_scan(a, a[q_a], min(k, n_a))
        raw_b = _knn_scan(b, b[q_b], min(k, n_b))

    target = min(len(raw_b), nmax_b)
    if neighbor_mode == "ball":
        target = min(target, len(sub_a))
    if target >= len(raw_b):
        sel_b = list(raw_b)
    elif target == 0:
        sel_b = []
    else:
        pos = rng.choice(len(raw_b), size=target, replace=False)
        sel_b = sorted(raw_b[p] for p in pos)

    in_a = set(sub_a)
    keep = [i for i in range(n_a) if i not in in_a]
    if not keep and not sel_b:
        return unchanged(applied=True, degenerate=True)

    offset = a[q_a] - b[q_b]
    moved = b[sel_b] + offset if sel_b else np.empty((0, 3), dtype=np.float64)
    kept = a[keep] if keep else np.empty((0, 3), dtype=np.float64)
    mixed = np.concatenate([kept, moved])
    provenance = np.concatenate(
        [np.zeros(len(keep), dtype=np.uint8), np.ones(len(sel_b), dtype=np.uint8)]
    )
    source_index = np.asarray(keep + sel_b, dtype=np.int64)

    if not keep or not sel_b:
        lam = 0.0
    else:
        lam = len(sel_b) / (len(keep) + len(sel_b))

    if size_policy == "fixed-n" and mixed.shape[0] < n_a:
        pad = rng.integers(0, mixed.shape[0], size=n_a - mixed.shape[0])
        mixed = np.concatenate([mixed, mixed[pad]])
        provenance = np.concatenate([provenance, provenance[pad]])
        source_index = np.concatenate([source_index, source_index[pad]])

    return {
        "mixed": mixed,
        "lam": lam,
        "label": (1.0 - lam) * ya + lam * yb,
        "provenance": provenance,
        "source_index": source_index,
        "applied": True,
        "degenerate": False,
    }
