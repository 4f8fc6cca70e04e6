"""Deterministic batch augmentation over a dataset of point clouds.

Every record is a pure function of (config, seed, inputs): sample i of
pass p owns the generator ``default_rng([seed, p, i])`` and the pairing
permutation of pass p owns ``default_rng([seed, p])``. Workers therefore
cannot change any output byte, only the wall time. A record is produced by
applying the configured augmentation stages to the sample, recomputing the
partner's augmented form from the partner's own stream, and mixing the two
with whatever is left of the sample's stream.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import convda, formats, mixing
from .errors import ConfigError, FormatError

RSMIX_STAGE = "rsmix"
PAIRINGS = ("random-shuffle", "sequential")


@dataclass(frozen=True)
class Dataset:
    clouds: np.ndarray  # (count, n, 3) float64
    labels: np.ndarray  # (count, classes) float64
    names: tuple[str, ...]


@dataclass(frozen=True)
class PipelineConfig:
    input_path: str
    input_format: str
    out_dir: str
    seed: int
    mix: mixing.MixParams = field(default_factory=mixing.MixParams)
    convda: convda.ConvDAConfig = field(default_factory=convda.ConvDAConfig)
    stages: tuple[str, ...] = (RSMIX_STAGE,)
    passes: int = 1
    pairing: str = "random-shuffle"
    workers: int = 1
    export_ply: int = 0

    def validate(self) -> None:
        if self.input_format not in formats.CLOUD_FORMATS:
            raise ConfigError(
                f"format: {self.input_format!r} is not one of {formats.CLOUD_FORMATS}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.passes < 1:
            raise ConfigError(f"passes: must be >= 1, got {self.passes!r}")
        if self.pairing not in PAIRINGS:
            raise ConfigError(f"pairing: {self.pairing!r} is not one of {PAIRINGS}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers!r}")
        if self.export_ply < 0:
            raise ConfigError(f"export-ply: must be >= 0, got {self.export_ply!r}")
        allowed = (*convda.STAGES, RSMIX_STAGE)
        for stage in self.stages:
            if stage not in allowed:
                raise ConfigError(f"stages: unknown stage {stage!r}")
        if len(set(self.stages)) != len(self.stages):
            raise ConfigError("stages: duplicate stage name")
        if (
            RSMIX_STAGE in self.stages
            and self.mix.neighbor_mode == "ball"
            and self.mix.size_policy == "paper"
        ):
            raise ConfigError(
                "size-policy: 'paper' with ball neighboring yields variable-size "
                "clouds, which the fixed-size batch container cannot hold; use "
                "--size-policy fixed-n or --neighbor knn"
            )


def sample_rng(seed: int, pass_idx: int, sample_idx: int) -> np.random.Generator:
    """The generator owned by one sample of one pass (PCG64, documented)."""
    return np.random.default_rng([seed, pass_idx, sample_idx])


def pairing_rng(seed: int, pass_idx: int) -> np.random.Generator:
    """The generator that draws the pass-level pairing permutation."""
    return np.random.default_rng([seed, pass_idx])


def partner_map(count: int, pairing: str, seed: int, pass_idx: int) -> np.ndarray:
    if pairing == "sequential":
        return (np.arange(count, dtype=np.int64) + 1) % count
    perm = pairing_rng(seed, pass_idx).permutation(count)
    return perm.astype(np.int64)


def load_dataset(input_path: str | Path, fmt: str) -> Dataset:
    """Load clouds and one-hot labels from a batch file or a directory.

    Directory inputs hold one cloud per file plus a ``labels.csv`` mapping
    file names to class indices; files are taken in sorted name order and
    all clouds must share one point count.
    """
    path = Path(input_path)
    if fmt == "batch":
        batch = formats.read_batch(path)
        names = tuple(f"record{i:05d}" for i in range(batch.clouds.shape[0]))
        return Dataset(clouds=batch.clouds, labels=batch.labels, names=names)

    if not path.is_dir():
        raise ConfigError(f"input: {path} must be a directory for format {fmt!r}")
    suffix = ".xyz" if fmt == "xyz-text" else ".ply"
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == suffix)
    if not files:
        raise ConfigError(f"input: no {suffix} files in {path}")
    label_map = formats.read_labels_csv(path / "labels.csv")
    classes = max(label_map.values()) + 1

    clouds = []
    labels = np.zeros((len(files), classes), dtype=np.float64)
    for i, f in enumerate(files):
        if f.name not in label_map:
            raise FormatError(f"labels.csv: missing entry for {f.name!r}")
        clouds.append(formats.read_cloud_file(f, fmt))
        labels[i, label_map[f.name]] = 1.0
    n = clouds[0].shape[0]
    for f, c in zip(files, clouds):
        if c.shape[0] != n:
            raise FormatError(
                f"inconsistent counts: {f.name} has {c.shape[0]} points, expected {n}"
            )
    return Dataset(
        clouds=np.stack(clouds), labels=labels, names=tuple(f.name for f in files)
    )


def _convda_stages(stages: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(s for s in stages if s != RSMIX_STAGE)


def make_record(
    dataset: Dataset,
    partners: np.ndarray,
    config: PipelineConfig,
    pass_idx: int,
    sample_idx: int,
) -> mixing.MixResult:
    """Compute one output record; independent of every other record."""
    rng = sample_rng(config.seed, pass_idx, sample_idx)
    conv = _convda_stages(config.stages)
    cloud = dataset.clouds[sample_idx]
    label = dataset.labels[sample_idx]
    if conv:
        cloud = convda.apply_stages(cloud, config.convda, conv, rng)

    if RSMIX_STAGE not in config.stages:
        return mixing.passthrough(cloud, label, applied=False)

    j = int(partners[sample_idx])
    partner_cloud = dataset.clouds[j]
    if conv:
        partner_cloud = convda.apply_stages(
            partner_cloud, config.convda, conv, sample_rng(config.seed, pass_idx, j)
        )
    return mixing.mix_pair(cloud, label, partner_cloud, dataset.labels[j], config.mix, rng)


# Worker state is inherited through fork so the dataset is not re-pickled
# per task; workers are spawned once per augment_batch call.
_WORKER: dict[str, object] = {}


def _chunk_records(args: tuple[int, int, int]) -> list[tuple[bytes, bytes, float, bool, bool]]:
    pass_idx, lo, hi = args
    dataset: Dataset = _WORKER["dataset"]  # type: ignore[assignment]
    config: PipelineConfig = _WORKER["config"]  # type: ignore[assignment]
    partners: np.ndarray = _WORKER["partners"][pass_idx]  # type: ignore[index]
    out = []
    for i in range(lo, hi):
        res = make_record(dataset, partners, config, pass_idx, i)
        out.append(
            (
                res.mixed.astype("<f4").tobytes(),
                res.label.astype("<f4").tobytes(),
                res.lam,
                res.applied,
                res.degenerate,
            )
        )
    return out


def augment_batch(config: PipelineConfig) -> dict[str, object]:
    """Run the pipeline: one batch file per pass plus a manifest.

    Returns the manifest as a dict (also written as key-value text).
    """
    config.validate()
    dataset = load_dataset(config.input_path, config.input_format)
    count, n_points, _ = dataset.clouds.shape
    classes = dataset.labels.shape[1]
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    all_partners = {
        p: partner_map(count, config.pairing, config.seed, p) for p in range(config.passes)
    }

    lam_values: list[float] = []
    applied_count = 0
    degenerate_count = 0

    chunk = max(64, count // (config.workers * 8) or 1)
    tasks = [
        (p, lo, min(lo + chunk, count))
        for p in range(config.passes)
        for lo in range(0, count, chunk)
    ]

    _WORKER["dataset"] = dataset
    _WORKER["config"] = config
    _WORKER["partners"] = all_partners
    try:
        if config.workers == 1:
            chunks = map(_chunk_records, tasks)
            results = _write_passes(chunks, tasks, config, out_dir, count, n_points, classes)
        else:
            import multiprocessing as mp

            ctx = mp.get_context("fork")
            with ProcessPoolExecutor(max_workers=config.workers, mp_context=ctx) as pool:
                chunks = pool.map(_chunk_records, tasks)
                results = _write_passes(
                    chunks, tasks, config, out_dir, count, n_points, classes
                )
    finally:
        _WORKER.clear()
    lam_values, applied_count, degenerate_count = results

    if config.export_ply > 0:
        _export_visualizations(dataset, all_partners, config, out_dir)

    manifest = _build_manifest(
        config, count, n_points, classes, lam_values, applied_count, degenerate_count
    )
    _write_manifest(out_dir / "manifest.txt", manifest)
    return manifest


def _write_passes(chunks, tasks, config, out_dir, count, n_points, classes):
    lam_values: list[float] = []
    applied = 0
    degenerate = 0
    handles = {}
    record_header = formats.BATCH_MAGIC + formats.pack_batch_header(count, n_points, classes)
    try:
        for (pass_idx, _, _), records in zip(tasks, chunks):
            if pass_idx not in handles:
                fh = open(out_dir / f"pass_{pass_idx:04d}.rsmx", "wb")
                fh.write(record_header)
                handles[pass_idx] = fh
            fh = handles[pass_idx]
            for coords, label, lam, was_applied, was_degenerate in records:
                fh.write(coords)
                fh.write(label)
                fh.write(np.float32(lam).tobytes())
                lam_values.append(lam)
                applied += was_applied
                degenerate += was_degenerate
    finally:
        for fh in handles.values():
            fh.close()
    return lam_values, applied, degenerate


def _export_visualizations(dataset, all_partners, config, out_dir):
    ply_dir = out_dir / "ply"
    ply_dir.mkdir(exist_ok=True)
    count = dataset.clouds.shape[0]
    for p in sorted(all_partners):
        for i in range(min(config.export_ply, count)):
            res = make_record(dataset, all_partners[p], config, p, i)
            formats.export_colored_ply(res, ply_dir / f"pass_{p:04d}_sample_{i:05d}.ply")


def _build_manifest(
    config: PipelineConfig,
    count: int,
    n_points: int,
    classes: int,
    lam_values: list[float],
    applied: int,
    degenerate: int,
) -> dict[str, object]:
    lams = np.asarray(lam_values, dtype=np.float64)
    hist, _ = np.histogram(lams, bins=10, range=(0.0, 1.0))
    manifest: dict[str, object] = {
        "input": config.input_path,
        "format": config.input_format,
        "seed": config.seed,
        "passes": config.passes,
        "clouds": count,
        "points_per_cloud": n_points,
        "classes": classes,
        "pairing": config.pairing,
        "workers": config.workers,
        "stage_order": ",".join(config.stages) if config.stages else "none",
        "neighbor_mode": config.mix.neighbor_mode,
        "theta": config.mix.theta,
        "nmax_fraction": config.mix.nmax_fraction,
        "apply_prob": config.mix.apply_prob,
        "size_policy": config.mix.size_policy,
        "jitter_sigma": config.convda.jitter_sigma,
        "jitter_clip": config.convda.jitter_clip,
        "scale_lo": config.convda.scale_lo,
        "scale_hi": config.convda.scale_hi,
        "shift_range": config.convda.shift_range,
        "drop_max_ratio": config.convda.drop_max_ratio,
        "records": len(lam_values),
        "mix_applied": applied,
        "mix_degenerate": degenerate,
        "lambda_mean": float(lams.mean()) if lams.size else 0.0,
    }
    for stage in config.stages:
        key = f"applied_{stage.replace('-', '_')}"
        manifest[key] = applied if stage == RSMIX_STAGE else len(lam_values)
    for b, c in enumerate(hist):
        manifest[f"lambda_hist_{b / 10:.1f}_{(b + 1) / 10:.1f}"] = int(c)
    return manifest


def _write_manifest(path: Path, manifest: dict[str, object]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in manifest.items():
            fh.write(f"{key}: {value}\n")


def stats_report(path: str | Path) -> dict[str, object]:
    """Summarize a batch file: sizes, mix-ratio stats, per-class label mass."""
    batch = formats.read_batch(path)
    count, n, _ = batch.clouds.shape
    hist, edges = np.histogram(batch.lams, bins=10, range=(0.0, 1.0))
    report: dict[str, object] = {
        "clouds": count,
        "points_per_cloud": n,
        "classes": batch.labels.shape[1],
        "lambda_mean": float(batch.lams.mean()),
        "lambda_max": float(batch.lams.max()),
        "lambda_hist": {
            f"{lo:.1f}-{hi:.1f}": int(c) for lo, hi, c in zip(edges[:-1], edges[1:], hist)
        },
        "class_mass": [float(v) for v in batch.labels.mean(axis=0)],
    }
    return report


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()
