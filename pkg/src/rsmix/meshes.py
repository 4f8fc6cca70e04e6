"""Triangle meshes: OFF parsing and area-weighted surface sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def face_areas(self) -> np.ndarray:
        a = self.vertices[self.faces[:, 0]]
        b = self.vertices[self.faces[:, 1]]
        c = self.vertices[self.faces[:, 2]]
        cross = np.cross(b - a, c - a)
        return 0.5 * np.sqrt(np.einsum("ij,ij->i", cross, cross))


def _tokens(text: str) -> list[tuple[int, list[str]]]:
    # (line number, fields) for non-empty, non-comment lines; 1-based lines.
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if body:
            out.append((lineno, body.split()))
    return out


def parse_off(data: bytes | str) -> TriangleMesh:
    """Parse OFF text into a triangle mesh.

    Handles the common header variant where "OFF" is glued to the counts
    line ("OFF490 948 0"). Faces with more than three vertices are split
    into a triangle fan. Malformed input raises FormatError naming the
    offending line.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = data
    lines = _tokens(text)
    if not lines:
        raise FormatError("empty input: no OFF content")

    lineno, fields = lines[0]
    rest = lines[1:]
    if fields[0].upper() == "OFF":
        fields = fields[1:]
    elif fields[0].upper().startswith("OFF"):
        # glued variant: counts start immediately after the keyword
        fields = [fields[0][3:], *fields[1:]]
    else:
        raise FormatError(f"line {lineno}: missing OFF header")
    if not fields:
        if not rest:
            raise FormatError(f"line {lineno}: missing element counts")
        lineno, fields = rest[0]
        rest = rest[1:]
    if len(fields) < 2:
        raise FormatError(f"line {lineno}: expected vertex/face/edge counts")
    try:
        n_vertices, n_faces = int(fields[0]), int(fields[1])
    except ValueError as exc:
        raise FormatError(f"line {lineno}: bad element counts: {exc}") from None
    if n_vertices <= 0:
        raise FormatError(f"line {lineno}: vertex count must be positive")
    if n_faces < 0:
        raise FormatError(f"line {lineno}: face count must be non-negative")

    if len(rest) < n_vertices + n_faces:
        raise FormatError(
            f"truncated file: header promises {n_vertices} vertices and "
            f"{n_faces} faces, found {len(rest)} data lines"
        )

    vertices = np.empty((n_vertices, 3), dtype=np.float64)
    for i in range(n_vertices):
        lineno, fields = rest[i]
        if len(fields) < 3:
            raise FormatError(f"line {lineno}: vertex needs 3 coordinates")
        try:
            vertices[i] = [float(fields[0]), float(fields[1]), float(fields[2])]
        except ValueError as exc:
            raise FormatError(f"line {lineno}: bad vertex coordinate: {exc}") from None
    if not np.isfinite(vertices).all():
        raise FormatError("vertex coordinates must be finite")

    triangles: list[tuple[int, int, int]] = []
    for i in range(n_faces):
        lineno, fields = rest[n_vertices + i]
        try:
            counts = [int(f) for f in fields]
        except ValueError as exc:
            raise FormatError(f"line {lineno}: bad face field: {exc}") from None
        if not counts or counts[0] < 3:
            raise FormatError(f"line {lineno}: face needs at least 3 vertices")
        m = counts[0]
        if len(counts) < 1 + m:
            raise FormatError(f"line {lineno}: face lists {m} vertices but has {len(counts) - 1}")
        idx = counts[1 : 1 + m]
        for v in idx:
            if not 0 <= v < n_vertices:
                raise FormatError(
                    f"line {lineno}: vertex index {v} out of range [0, {n_vertices})"
                )
        for j in range(1, m - 1):
            triangles.append((idx[0], idx[j], idx[j + 1]))

    faces = (
        np.asarray(triangles, dtype=np.int64)
        if triangles
        else np.empty((0, 3), dtype=np.int64)
    )
    return TriangleMesh(vertices=vertices, faces=faces)


def sample_mesh_surface(mesh: TriangleMesh, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample n points on the surface, faces weighted by area.

    Each point picks a face with probability proportional to its area and
    a uniform position within it via the reflected-barycentric trick;
    zero-area faces are never chosen.
    """
    if n <= 0:
        raise ValueError(f"sample count must be positive, got {n!r}")
    if mesh.faces.shape[0] == 0:
        raise ValueError("degenerate mesh: no faces to sample")
    areas = mesh.face_areas()
    total = float(areas.sum())
    if total <= 0.0:
        raise ValueError("degenerate mesh: total surface area is zero")

    face_idx = rng.choice(mesh.faces.shape[0], size=n, p=areas / total)
    uv = rng.random((n, 2))
    flip = uv.sum(axis=1) > 1.0
    uv[flip] = 1.0 - uv[flip]

    tri = mesh.vertices[mesh.faces[face_idx]]
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    return a + uv[:, :1] * (b - a) + uv[:, 1:] * (c - a)
