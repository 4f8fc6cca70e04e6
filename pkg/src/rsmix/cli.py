"""Command-line interface: ``mix``, ``stats``, and ``sample-mesh``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import convda, formats, meshes, mixing, pipeline
from .errors import ConfigError, FormatError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rsmix",
        description="Shape-preserving point-cloud mixing and augmentation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mix = sub.add_parser("mix", help="augment a dataset and write batch files")
    mix.add_argument("--input", required=True, help="batch file or cloud directory")
    mix.add_argument(
        "--format",
        default="batch",
        choices=formats.CLOUD_FORMATS,
        help="input encoding (directory formats need a labels.csv)",
    )
    mix.add_argument("--out", required=True, help="output directory")
    mix.add_argument("--seed", type=int, default=0, help="global 64-bit seed")
    mix.add_argument("--passes", type=int, default=1, help="augmentation passes over the data")
    mix.add_argument("--neighbor", default="ball", choices=("ball", "knn"))
    mix.add_argument("--theta", type=float, default=1.0, help="Beta shape for the subset scale")
    mix.add_argument(
        "--nmax-frac", type=float, default=0.5, help="max inserted fraction of a cloud"
    )
    mix.add_argument("--apply-prob", type=float, default=0.5, help="chance a sample is mixed")
    mix.add_argument(
        "--size-policy",
        default="fixed-n",
        choices=("paper", "fixed-n"),
        help="'fixed-n' pads mixed clouds back to n points (batch files need fixed n)",
    )
    mix.add_argument(
        "--convda",
        default="",
        help=f"comma list of conventional stages to run first: {','.join(convda.STAGES)}",
    )
    mix.add_argument("--jitter-sigma", type=float, default=0.01)
    mix.add_argument("--jitter-clip", type=float, default=0.05)
    mix.add_argument("--scale-lo", type=float, default=0.8)
    mix.add_argument("--scale-hi", type=float, default=1.25)
    mix.add_argument("--shift-range", type=float, default=0.1)
    mix.add_argument("--drop-max-ratio", type=float, default=0.875)
    mix.add_argument(
        "--no-rsmix", action="store_true", help="disable the mixing stage itself"
    )
    mix.add_argument("--pairing", default="random-shuffle", choices=pipeline.PAIRINGS)
    mix.add_argument("--workers", type=int, default=1)
    mix.add_argument(
        "--export-ply",
        type=int,
        default=0,
        metavar="COUNT",
        help="also write colored visualizations for the first COUNT samples per pass",
    )

    stats = sub.add_parser("stats", help="summarize a batch file")
    stats.add_argument("batch", help="path to a batch file")

    mesh = sub.add_parser(
        "sample-mesh", help="area-weighted surface sampling of an OFF mesh"
    )
    mesh.add_argument("mesh", help="path to an OFF file")
    mesh.add_argument("--n", type=int, default=1024, help="number of surface samples")
    mesh.add_argument("--seed", type=int, default=0)
    mesh.add_argument("--out", required=True, help="output cloud (.xyz or .ply)")
    mesh.add_argument(
        "--no-normalize",
        action="store_true",
        help="skip centering and unit-sphere rescaling",
    )
    return parser


def _convda_stages(raw: str) -> tuple[str, ...]:
    if not raw or raw == "none":
        return ()
    stages = tuple(s.strip() for s in raw.split(",") if s.strip())
    for s in stages:
        if s not in convda.STAGES:
            raise ConfigError(f"convda: unknown stage {s!r}, expected one of {convda.STAGES}")
    return stages


def _run_mix(args: argparse.Namespace) -> None:
    stages = _convda_stages(args.convda)
    if not args.no_rsmix:
        stages = (*stages, pipeline.RSMIX_STAGE)
    config = pipeline.PipelineConfig(
        input_path=args.input,
        input_format=args.format,
        out_dir=args.out,
        seed=args.seed,
        mix=mixing.MixParams(
            neighbor_mode=args.neighbor,
            theta=args.theta,
            nmax_fraction=args.nmax_frac,
            apply_prob=args.apply_prob,
            size_policy=args.size_policy,
        ),
        convda=convda.ConvDAConfig(
            jitter_sigma=args.jitter_sigma,
            jitter_clip=args.jitter_clip,
            scale_lo=args.scale_lo,
            scale_hi=args.scale_hi,
            shift_range=args.shift_range,
            drop_max_ratio=args.drop_max_ratio,
        ),
        stages=stages,
        passes=args.passes,
        pairing=args.pairing,
        workers=args.workers,
        export_ply=args.export_ply,
    )
    manifest = pipeline.augment_batch(config)
    print(f"wrote {manifest['passes']} pass file(s) to {args.out}")
    print(f"records: {manifest['records']}, lambda mean: {manifest['lambda_mean']:.4f}")


def _run_stats(args: argparse.Namespace) -> None:
    report = pipeline.stats_report(args.batch)
    print(f"clouds: {report['clouds']}")
    print(f"points_per_cloud: {report['points_per_cloud']}")
    print(f"classes: {report['classes']}")
    print(f"lambda_mean: {report['lambda_mean']:.6f}")
    print(f"lambda_max: {report['lambda_max']:.6f}")
    print("lambda_hist:")
    for rng_, count in report["lambda_hist"].items():
        print(f"  {rng_}: {count}")
    mass = ", ".join(f"{m:.4f}" for m in report["class_mass"])
    print(f"class_mass: {mass}")


def _run_sample_mesh(args: argparse.Namespace) -> None:
    if args.n <= 0:
        raise ConfigError(f"n: must be positive, got {args.n}")
    mesh = meshes.parse_off(Path(args.mesh).read_bytes())
    cloud = meshes.sample_mesh_surface(mesh, args.n, np.random.default_rng(args.seed))
    if not args.no_normalize:
        cloud = mixing.normalize_unit_sphere(cloud)
    out = Path(args.out)
    fmt = "xyz-text" if out.suffix.lower() == ".xyz" else "ply-binary-le"
    formats.write_cloud_file(out, cloud, fmt)
    print(f"sampled {args.n} points from {args.mesh} -> {out}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "mix":
            _run_mix(args)
        elif args.command == "stats":
            _run_stats(args)
        elif args.command == "sample-mesh":
            _run_sample_mesh(args)
    except (ConfigError, FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
