"""Generate a small synthetic dataset to exercise the CLI end to end.

Writes parametric meshes (boxes, pyramids, prisms) as OFF files, samples
them onto unit-sphere clouds, and emits both an xyz directory with a
labels.csv and a ready-to-mix batch file.

Usage: python3 scripts/make_demo_data.py --out demo --per-class 8
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from rsmix import formats
from rsmix.meshes import TriangleMesh, sample_mesh_surface
from rsmix.mixing import normalize_unit_sphere


def box(rng):
    dims = rng.uniform(0.4, 1.6, 3)
    v = np.array(
        [[x, y, z] for x in (0, dims[0]) for y in (0, dims[1]) for z in (0, dims[2])]
    )
    quads = [
        (0, 1, 3, 2), (4, 5, 7, 6), (0, 1, 5, 4),
        (2, 3, 7, 6), (0, 2, 6, 4), (1, 3, 7, 5),
    ]
    faces = []
    for a, b, c, d in quads:
        faces += [(a, b, c), (a, c, d)]
    return TriangleMesh(vertices=v, faces=np.array(faces))


def pyramid(rng):
    base = rng.uniform(0.5, 1.5)
    apex = rng.uniform(0.5, 2.0)
    v = np.array(
        [[0, 0, 0], [base, 0, 0], [base, base, 0], [0, base, 0],
         [base / 2, base / 2, apex]]
    )
    faces = np.array([[0, 1, 2], [0, 2, 3], [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]])
    return TriangleMesh(vertices=v, faces=faces)


def prism(rng):
    width = rng.uniform(0.4, 1.2)
    height = rng.uniform(0.8, 2.0)
    tri = np.array([[0, 0], [width, 0], [width / 2, width]])
    v = np.vstack([np.column_stack([tri, np.zeros(3)]), np.column_stack([tri, np.full(3, height)])])
    faces = np.array(
        [[0, 1, 2], [3, 4, 5], [0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4], [2, 0, 3], [2, 3, 5]]
    )
    return TriangleMesh(vertices=v, faces=faces)


GENERATORS = (box, pyramid, prism)


def mesh_to_off(mesh):
    lines = ["OFF", f"{len(mesh.vertices)} {len(mesh.faces)} 0"]
    lines += [f"{x} {y} {z}" for x, y, z in mesh.vertices]
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.faces]
    return "\n".join(lines) + "\n"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo")
    parser.add_argument("--per-class", type=int, default=8)
    parser.add_argument("--n", type=int, default=1024)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "off").mkdir(parents=True, exist_ok=True)
    (out / "xyz").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    clouds, labels, rows = [], [], []
    for cls, make in enumerate(GENERATORS):
        for i in range(args.per_class):
            mesh = make(rng)
            name = f"{make.__name__}_{i:03d}"
            (out / "off" / f"{name}.off").write_text(mesh_to_off(mesh))
            cloud = normalize_unit_sphere(sample_mesh_surface(mesh, args.n, rng))
            formats.write_xyz(out / "xyz" / f"{name}.xyz", cloud)
            rows.append(f"{name}.xyz,{cls}")
            clouds.append(cloud)
            labels.append(np.eye(len(GENERATORS))[cls])

    (out / "xyz" / "labels.csv").write_text("\n".join(sorted(rows)) + "\n")
    formats.write_batch(
        out / "demo.rsmx", np.stack(clouds), np.stack(labels), np.zeros(len(clouds))
    )
    print(f"wrote {len(clouds)} clouds: {out}/off, {out}/xyz, {out}/demo.rsmx")
    print(f"try: rsmix mix --input {out}/demo.rsmx --out {out}/aug --apply-prob 1 --export-ply 3")


if __name__ == "__main__":
    main()
