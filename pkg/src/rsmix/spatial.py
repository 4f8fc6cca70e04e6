"""Exact nearest-neighbor and radius queries over a fixed point cloud.

The index is a flat-array kd-tree: internal nodes split the widest-spread
axis at the median, leaves hold contiguous ranges of a point permutation.
Results are defined to be identical to a brute-force scan, including ties:
equal distances are broken by the lower point index, and radius queries are
boundary-inclusive (``d <= r``). ``brute_knn`` / ``brute_radius`` implement
that scan directly and serve as the reference oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LEAF_SIZE = 64


@dataclass(frozen=True)
class SpatialIndex:
    """Immutable kd-tree over an (n, 3) float array.

    ``order`` is a permutation of point indices; each leaf owns the slice
    ``order[start[i]:end[i]]``. ``split_dim`` is -1 for leaves. The index
    never copies or mutates ``points``; concurrent read-only queries are
    safe.
    """

    points: np.ndarray
    order: np.ndarray
    split_dim: np.ndarray
    split_val: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def _as_points(cloud: np.ndarray) -> np.ndarray:
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) point array, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise ValueError("empty input: point cloud has no points")
    if not np.isfinite(pts).all():
        raise ValueError("point cloud contains non-finite coordinates")
    return pts


def _as_query(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape != (3,):
        raise ValueError(f"query point must have 3 coordinates, got shape {q.shape}")
    if not np.isfinite(q).all():
        raise ValueError("query point contains non-finite coordinates")
    return q


def build_index(cloud: np.ndarray, leaf_size: int = _LEAF_SIZE) -> SpatialIndex:
    """Build a kd-tree over ``cloud``. Deterministic for a given input."""
    if leaf_size < 1:
        raise ValueError(f"leaf_size must be >= 1, got {leaf_size!r}")
    pts = _as_points(cloud)
    n = pts.shape[0]
    order = np.arange(n, dtype=np.int64)

    # Median splits keep every leaf above leaf_size // 2 points, which
    # bounds the node count; +3 covers the tiny-n cases.
    cap = 4 * (n // max(1, leaf_size)) + 3
    split_dim = np.full(cap, -1, dtype=np.int8)
    split_val = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    start = np.zeros(cap, dtype=np.int64)
    end = np.zeros(cap, dtype=np.int64)

    n_nodes = 1
    stack = [(0, n, 0)]
    while stack:
        lo, hi, node = stack.pop()
        if hi - lo <= leaf_size:
            start[node] = lo
            end[node] = hi
            continue
        seg = order[lo:hi]
        coords = pts[seg]
        spread = coords.max(axis=0)
        spread -= coords.min(axis=0)
        dim = int(spread.argmax())
        mid = (lo + hi) // 2
        part = np.argpartition(coords[:, dim], mid - lo)
        order[lo:hi] = seg[part]
        split_dim[node] = dim
        split_val[node] = pts[order[mid], dim]
        left[node] = n_nodes
        right[node] = n_nodes + 1
        stack.append((lo, mid, n_nodes))
        stack.append((mid, hi, n_nodes + 1))
        n_nodes += 2

    return SpatialIndex(
        points=pts,
        order=order,
        split_dim=split_dim[:n_nodes],
        split_val=split_val[:n_nodes],
        left=left[:n_nodes],
        right=right[:n_nodes],
        start=start[:n_nodes],
        end=end[:n_nodes],
    )


def query_knn(index: SpatialIndex, q: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest points to ``q``, nearest first.

    Distance ties are broken by the lower point index; if ``q`` coincides
    with a cloud point that point is returned (distance 0). Output order is
    ascending (distance, index).
    """
    q = _as_query(q)
    n = len(index)
    if not 1 <= k <= n:
        raise ValueError(f"invalid k: {k} not in [1, {n}]")

    pts = index.points
    # Running top-k kept sorted by (distance^2, index); the last entry is
    # the pruning bound once k candidates have been seen.
    best_d2 = np.empty(0, dtype=np.float64)
    best_idx = np.empty(0, dtype=np.int64)

    def visit(node: int) -> None:
        nonlocal best_d2, best_idx
        dim = index.split_dim[node]
        if dim < 0:
            seg = index.order[index.start[node] : index.end[node]]
            diff = pts[seg] - q
            d2 = np.einsum("ij,ij->i", diff, diff)
            cand_d2 = np.concatenate([best_d2, d2])
            cand_idx = np.concatenate([best_idx, seg])
            ranked = np.lexsort((cand_idx, cand_d2))[:k]
            best_d2 = cand_d2[ranked]
            best_idx = cand_idx[ranked]
            return
        delta = q[dim] - index.split_val[node]
        near, far = (
            (index.left[node], index.right[node])
            if delta <= 0
            else (index.right[node], index.left[node])
        )
        visit(near)
        # Visit the far side on boundary equality: an equal-distance point
        # with a lower index can still displace the current worst.
        if best_idx.size < k or delta * delta <= best_d2[-1]:
            visit(far)

    visit(0)
    return best_idx


def query_radius(index: SpatialIndex, q: np.ndarray, r: float) -> np.ndarray:
    """Indices of all points with ``|p - q| <= r``, in ascending index order."""
    q = _as_query(q)
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"invalid radius: {r!r}")
    r2 = float(r) * float(r)

    pts = index.points
    hits: list[np.ndarray] = []
    stack = [0]
    while stack:
        node = stack.pop()
        dim = index.split_dim[node]
        if dim < 0:
            seg = index.order[index.start[node] : index.end[node]]
            diff = pts[seg] - q
            d2 = np.einsum("ij,ij->i", diff, diff)
            hits.append(seg[d2 <= r2])
            continue
        delta = q[dim] - index.split_val[node]
        if delta <= 0:
            stack.append(index.left[node])
            if delta * delta <= r2:
                stack.append(index.right[node])
        else:
            stack.append(index.right[node])
            if delta * delta <= r2:
                stack.append(index.left[node])
    if not hits:
        return np.empty(0, dtype=np.int64)
    out = np.concatenate(hits)
    out.sort()
    return out


def brute_knn(cloud: np.ndarray, q: np.ndarray, k: int) -> np.ndarray:
    """Reference linear-scan KNN with the same (distance, index) tie-break."""
    pts = _as_points(cloud)
    q = _as_query(q)
    n = pts.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"invalid k: {k} not in [1, {n}]")
    diff = pts - q
    d2 = np.einsum("ij,ij->i", diff, diff)
    ranked = np.lexsort((np.arange(n), d2))
    return ranked[:k].astype(np.int64)


def brute_radius(cloud: np.ndarray, q: np.ndarray, r: float) -> np.ndarray:
    """Reference linear-scan radius query, boundary inclusive."""
    pts = _as_points(cloud)
    q = _as_query(q)
    if not np.isfinite(r) or r < 0:
        raise ValueError(f"invalid radius: {r!r}")
    diff = pts - q
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.nonzero(d2 <= float(r) * float(r))[0].astype(np.int64)
