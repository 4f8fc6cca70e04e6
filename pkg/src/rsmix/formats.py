"""Cloud serialization: xyz text, PLY (ascii / binary LE), and batch files.

The batch container is the pipeline's native output: magic ``RSMX1``,
little-endian u32 header (cloud count, points per cloud, class count),
then per record n*3 float32 coordinates, a float32 label vector, and a
float32 mix ratio. All readers raise FormatError on malformed input.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError
from .mixing import FROM_BASE, MixResult

BATCH_MAGIC = b"RSMX1"
_HEADER = struct.Struct("<III")


def pack_batch_header(count: int, n: int, classes: int) -> bytes:
    return _HEADER.pack(count, n, classes)

CLOUD_FORMATS = ("xyz-text", "ply-ascii", "ply-binary-le", "batch")

# provenance colors for exported visualizations (base, inserted)
_BASE_COLOR = (148, 103, 189)
_PARTNER_COLOR = (255, 187, 0)


@dataclass(frozen=True)
class BatchData:
    clouds: np.ndarray  # (count, n, 3) float64
    labels: np.ndarray  # (count, classes) float64
    lams: np.ndarray  # (count,) float64


def _fmt(value: float) -> str:
    # shortest decimal that round-trips the float32 value
    return str(np.float32(value))


def _check_points(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array, got shape {pts.shape}")
    return pts


# --- xyz text ---------------------------------------------------------------


def read_xyz(path: str | Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 3:
                raise FormatError(f"{path}: line {lineno}: expected 3 coordinates")
            try:
                rows.append([float(fields[0]), float(fields[1]), float(fields[2])])
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise FormatError(f"{path}: empty input")
    pts = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(pts).all():
        raise FormatError(f"{path}: non-finite coordinate")
    return pts


def write_xyz(path: str | Path, points: np.ndarray) -> None:
    pts = _check_points(points)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, z in pts:
            fh.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n")


# --- PLY --------------------------------------------------------------------

_PLY_SIZES = {
    "char": 1, "int8": 1, "uchar": 1, "uint8": 1,
    "short": 2, "int16": 2, "ushort": 2, "uint16": 2,
    "int": 4, "int32": 4, "uint": 4, "uint32": 4,
    "float": 4, "float32": 4,
    "double": 8, "float64": 8,
}


def _parse_ply_header(data: bytes, path: str | Path) -> tuple[str, int, list[tuple[str, str]], int]:
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise FormatError(f"{path}: not a PLY file")
    end = data.index(b"\n", end) + 1 if b"\n" in data[end:] else len(data)
    header = data[:end].decode("ascii", errors="replace")

    fmt = None
    n_vertices = None
    properties: list[tuple[str, str]] = []
    element = None
    for lineno, line in enumerate(header.splitlines(), start=1):
        fields = line.split()
        if not fields or fields[0] == "comment":
            continue
        if fields[0] == "format":
            if len(fields) < 2 or fields[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"{path}: line {lineno}: unsupported PLY format")
            fmt = fields[1]
        elif fields[0] == "element":
            if len(fields) < 3:
                raise FormatError(f"{path}: line {lineno}: bad element declaration")
            element = fields[1]
            if element == "vertex":
                try:
                    n_vertices = int(fields[2])
                except ValueError:
                    raise FormatError(f"{path}: line {lineno}: bad vertex count") from None
        elif fields[0] == "property" and element == "vertex":
            if len(fields) == 3:
                properties.append((fields[1], fields[2]))
            elif len(fields) >= 2 and fields[1] == "list":
                raise FormatError(f"{path}: line {lineno}: list property on vertices unsupported")
            else:
                raise FormatError(f"{path}: line {lineno}: bad property declaration")
    if fmt is None or n_vertices is None:
        raise FormatError(f"{path}: PLY header missing format or vertex element")
    if n_vertices <= 0:
        raise FormatError(f"{path}: empty input: no vertices")
    names = [name for _, name in properties]
    if any(axis not in names for axis in ("x", "y", "z")):
        raise FormatError(f"{path}: PLY vertices lack x/y/z properties")
    return fmt, n_vertices, properties, end


def read_ply(path: str | Path) -> np.ndarray:
    """Read vertex geometry from an ascii or binary-LE PLY; extra per-vertex
    properties such as colors are skipped."""
    data = Path(path).read_bytes()
    fmt, n_vertices, properties, body_start = _parse_ply_header(data, path)
    names = [name for _, name in properties]
    xyz_pos = [names.index(a) for a in ("x", "y", "z")]

    if fmt == "ascii":
        text = data[body_start:].decode("utf-8", errors="replace")
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if len(rows) < n_vertices:
            raise FormatError(f"{path}: truncated file: {len(rows)} of {n_vertices} vertices")
        pts = np.empty((n_vertices, 3), dtype=np.float64)
        for i in range(n_vertices):
            row = rows[i]
            if len(row) < len(properties):
                raise FormatError(f"{path}: vertex {i}: expected {len(properties)} fields")
            try:
                pts[i] = [float(row[p]) for p in xyz_pos]
            except ValueError as exc:
                raise FormatError(f"{path}: vertex {i}: {exc}") from None
    else:
        try:
            sizes = [_PLY_SIZES[t] for t, _ in properties]
        except KeyError as exc:
            raise FormatError(f"{path}: unknown PLY property type {exc}") from None
        stride = sum(sizes)
        body = data[body_start : body_start + n_vertices * stride]
        if len(body) < n_vertices * stride:
            raise FormatError(f"{path}: truncated file: vertex data too short")
        offsets = np.cumsum([0, *sizes[:-1]])
        pts = np.empty((n_vertices, 3), dtype=np.float64)
        for col, p in enumerate(xyz_pos):
            kind, _ = properties[p]
            if kind not in ("float", "float32"):
                raise FormatError(f"{path}: coordinate property must be float32, got {kind}")
            view = np.ndarray(
                (n_vertices,), dtype="<f4", buffer=body, offset=int(offsets[p]), strides=(stride,)
            )
            with np.errstate(invalid="ignore"):  # garbage bytes checked below
                pts[:, col] = view.astype(np.float64)
    if not np.isfinite(pts).all():
        raise FormatError(f"{path}: non-finite coordinate")
    return pts


def write_ply(path: str | Path, points: np.ndarray, binary: bool = True) -> None:
    pts = _check_points(points)
    n = pts.shape[0]
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"element vertex {n}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        if binary:
            fh.write(pts.astype("<f4").tobytes())
        else:
            f32 = pts.astype(np.float32)
            for x, y, z in f32:
                fh.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)}\n".encode("ascii"))


def export_colored_ply(result: MixResult, path: str | Path) -> None:
    """Write an ascii PLY of a mix result with per-point provenance colors."""
    pts = result.mixed.astype(np.float32)
    n = pts.shape[0]
    header = (
        "ply\n"
        "format ascii 1.0\n"
        f"element vertex {n}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for (x, y, z), tag in zip(pts, result.provenance):
            r, g, b = _BASE_COLOR if tag == FROM_BASE else _PARTNER_COLOR
            fh.write(f"{_fmt(x)} {_fmt(y)} {_fmt(z)} {r} {g} {b}\n".encode("ascii"))


# --- batch container --------------------------------------------------------


def write_batch(
    path: str | Path,
    clouds: np.ndarray,
    labels: np.ndarray,
    lams: np.ndarray,
) -> None:
    clouds = np.asarray(clouds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    lams = np.asarray(lams, dtype=np.float64).reshape(-1)
    if clouds.ndim != 3 or clouds.shape[2] != 3:
        raise ValueError(f"clouds must be (count, n, 3), got shape {clouds.shape}")
    count, n, _ = clouds.shape
    if labels.ndim != 2 or labels.shape[0] != count:
        raise ValueError(f"labels must be (count, classes), got shape {labels.shape}")
    if lams.shape[0] != count:
        raise ValueError("one mix ratio per cloud required")
    if np.any((lams < 0) | (lams > 1)):
        raise ValueError("mix ratios must be in [0, 1]")
    classes = labels.shape[1]

    body = np.empty((count, n * 3 + classes + 1), dtype="<f4")
    body[:, : n * 3] = clouds.reshape(count, n * 3)
    body[:, n * 3 : n * 3 + classes] = labels
    body[:, -1] = lams
    with open(path, "wb") as fh:
        fh.write(BATCH_MAGIC)
        fh.write(_HEADER.pack(count, n, classes))
        fh.write(body.tobytes())


def read_batch(path: str | Path) -> BatchData:
    data = Path(path).read_bytes()
    if len(data) < len(BATCH_MAGIC) + _HEADER.size:
        raise FormatError(f"{path}: truncated file: shorter than the header")
    if data[: len(BATCH_MAGIC)] != BATCH_MAGIC:
        raise FormatError(f"{path}: bad magic, not a batch file")
    count, n, classes = _HEADER.unpack_from(data, len(BATCH_MAGIC))
    if count == 0 or n == 0:
        raise FormatError(f"{path}: empty input: zero clouds or points")
    record_floats = n * 3 + classes + 1
    expected = len(BATCH_MAGIC) + _HEADER.size + count * record_floats * 4
    if len(data) != expected:
        raise FormatError(
            f"{path}: inconsistent counts: expected {expected} bytes, found {len(data)}"
        )
    body = np.frombuffer(data, dtype="<f4", offset=len(BATCH_MAGIC) + _HEADER.size)
    with np.errstate(invalid="ignore"):  # garbage bytes checked below
        body = body.reshape(count, record_floats).astype(np.float64)
    clouds = body[:, : n * 3].reshape(count, n, 3)
    labels = body[:, n * 3 : n * 3 + classes]
    lams = body[:, -1]
    if not np.isfinite(body).all():
        raise FormatError(f"{path}: non-finite value in record data")
    if np.any((lams < 0) | (lams > 1)):
        raise FormatError(f"{path}: mix ratio out of [0, 1]")
    return BatchData(clouds=clouds, labels=labels, lams=lams)


# --- dataset ingestion ------------------------------------------------------


def read_labels_csv(path: str | Path) -> dict[str, int]:
    """Read a ``filename,class_index`` CSV into a mapping."""
    mapping: dict[str, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'filename,class_index'")
            name, raw = row[0].strip(), row[1].strip()
            try:
                cls = int(raw)
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: bad class index {raw!r}") from None
            if cls < 0:
                raise FormatError(f"{path}: line {lineno}: negative class index")
            if name in mapping:
                raise FormatError(f"{path}: line {lineno}: duplicate entry for {name!r}")
            mapping[name] = cls
    if not mapping:
        raise FormatError(f"{path}: empty input")
    return mapping


def read_cloud_file(path: str | Path, fmt: str) -> np.ndarray:
    if fmt == "xyz-text":
        return read_xyz(path)
    if fmt in ("ply-ascii", "ply-binary-le"):
        return read_ply(path)
    raise ValueError(f"unknown cloud format {fmt!r}")


def write_cloud_file(path: str | Path, points: np.ndarray, fmt: str) -> None:
    if fmt == "xyz-text":
        write_xyz(path, points)
    elif fmt == "ply-ascii":
        write_ply(path, points, binary=False)
    elif fmt == "ply-binary-le":
        write_ply(path, points, binary=True)
    else:
        raise ValueError(f"unknown cloud format {fmt!r}")
