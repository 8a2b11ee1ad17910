"""End-to-end orchestration: crops -> representations -> selection -> score.

The unit of learning is the cube: each cube yields one feature vector (four
concatenated representations) and inherits its video's MOS label.  Scores are
re-assembled per sub-video (median over cubes) and per video (mean over
sub-videos).
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _library_version
from .config import RunConfig
from .cropping import SubCube, SubImage, crop_cubes, crop_sub_cube, crop_sub_images, split_sub_videos
from .errors import ConfigError, FitError
from .feature_selection import KINDS, FeatureSelector, run_rft, select_features
from .media_io import DatasetManifest, ManifestEntry, VideoClip, load_video
from .motion import estimate_motion, raw_temporal_vector
from .regression import GbdtModel, ScoreReport, TrainConfig, ensemble_scores, train_gbdt
from .representations import (
    FitOptions,
    SpatialPipeline,
    SpatioColorPipeline,
    SpatioTemporalPipeline,
    TemporalPipeline,
)

FORMAT_VERSION = 1


@dataclass
class CubeSample:
    """One cube's crops, flattened to what the representations consume."""

    video_path: str
    video_index: int
    subvideo_index: int
    cube_index: int
    sub_image: SubImage
    sub_cube: SubCube
    mos: float | None = None
    cube_luma: np.ndarray | None = None  # retained only when temporal is deferred
    temporal_raw: np.ndarray | None = None


@dataclass
class TrainedModel:
    format_version: int
    config: RunConfig
    spatial: SpatialPipeline
    spatio_color: SpatioColorPipeline
    temporal: TemporalPipeline
    spatio_temporal: SpatioTemporalPipeline
    selector: FeatureSelector
    gbdt: GbdtModel
    metadata: dict = field(default_factory=dict)

    def dims(self) -> dict[str, int]:
        return {
            "spatial": self.spatial.dim,
            "spatio_color": self.spatio_color.dim,
            "temporal": self.temporal.dim,
            "spatio_temporal": self.spatio_temporal.dim,
        }


def _crop_seed(base: int, video_index: int, subvideo_index: int, salt: int):
    return np.random.SeedSequence([base, video_index, subvideo_index, salt])


def extract_cube_samples(clip: VideoClip, config: RunConfig, crop_seed_base: int,
                         video_index: int = 0, mos: float | None = None,
                         eager_temporal: bool = True) -> list[CubeSample]:
    """Crop one clip into cube samples.

    With ``eager_temporal`` the motion statistics are computed immediately so
    the cube's pixel volume can be dropped (training-scale memory); otherwise
    the luma cube is kept for later staged generation.
    """
    samples = []
    for si, sub_video in enumerate(split_sub_videos(clip, config.sub_video_len)):
        sub_images = crop_sub_images(
            sub_video, count=config.sub_images_per_frame,
            size=config.sub_image_size,
            seed=_crop_seed(crop_seed_base, video_index, si, 0))
        cubes = crop_cubes(sub_video, [img.origin for img in sub_images],
                           size=config.sub_image_size, mos_label=mos)
        for ci, (img, cube) in enumerate(zip(sub_images, cubes)):
            sub_cube = crop_sub_cube(
                cube, seed=_crop_seed(crop_seed_base, video_index, si, 1 + ci),
                dims=config.sub_cube_dims)
            sample = CubeSample(
                video_path=clip.source, video_index=video_index,
                subvideo_index=si, cube_index=ci,
                sub_image=img, sub_cube=sub_cube, mos=mos)
            if eager_temporal:
                fields = estimate_motion(cube.luma, config.mv_block_size,
                                         config.mv_search_range)
                sample.temporal_raw = raw_temporal_vector(
                    fields, config.sub_video_len, config.mv_sig_threshold)
            else:
                sample.cube_luma = cube.luma
            samples.append(sample)
    return samples


def _thread_count(config: RunConfig) -> int:
    return config.threads if config.threads > 0 else (os.cpu_count() or 1)


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def extract_dataset(entries, config: RunConfig, crop_seed_base: int,
                    loader=load_video, threads: int | None = None) -> list[CubeSample]:
    """Decode and crop a list of manifest entries (cube order is stable)."""
    threads = _thread_count(config) if threads is None else threads

    def one(pair):
        index, entry = pair
        clip = loader(entry.path)
        return extract_cube_samples(clip, config, crop_seed_base,
                                    video_index=index, mos=entry.mos)
    nested = _map_ordered(one, list(enumerate(entries)), threads)
    return [sample for group in nested for sample in group]


def _generate_matrix(samples, model_or_pipelines,
                     threads: int) -> dict[str, np.ndarray]:
    """Per-kind feature matrices (n_cubes x dim), cube order preserved."""
    spatial = model_or_pipelines["spatial"]
    spatio_color = model_or_pipelines["spatio_color"]
    temporal = model_or_pipelines["temporal"]
    spatio_temporal = model_or_pipelines["spatio_temporal"]

    def one(sample: CubeSample):
        t_source = sample.temporal_raw if sample.temporal_raw is not None \
            else sample.cube_luma
        return (
            spatial.generate(sample.sub_image).values,
            spatio_color.generate(sample.sub_image).values,
            temporal.generate(t_source).values,
            spatio_temporal.generate(sample.sub_cube).values,
        )

    rows = _map_ordered(one, samples, threads)
    return {
        "spatial": np.array([r[0] for r in rows]),
        "spatio_color": np.array([r[1] for r in rows]),
        "temporal": np.array([r[2] for r in rows]),
        "spatio_temporal": np.array([r[3] for r in rows]),
    }


def _dataset_hash(entries) -> str:
    digest = hashlib.sha256()
    for e in entries:
        digest.update(f"{e.path},{e.mos!r},{e.split}\n".encode())
    return digest.hexdigest()


@dataclass
class TrainReport:
    dims: dict[str, int]
    selected: dict[str, int]
    num_train_cubes: int
    num_val_cubes: int
    num_trees: int
    val_rmse: float
    fit_seconds: float


def train_model(train_entries, val_entries, config: RunConfig,
                gbdt_seed: int = 0, crop_seed_base: int | None = None,
                loader=load_video, threads: int | None = None,
                ) -> tuple[TrainedModel, TrainReport]:
    """Fit the full pipeline on the train split, early-stop on the val split.

    Only training-split cubes reach any fit operation; validation cubes are
    used solely for boosting's early stopping.  The audit trail of video
    paths seen by fits is stored in the model metadata.
    """
    config.validate()
    if not train_entries:
        raise ConfigError("training split is empty")
    if not val_entries:
        raise ConfigError("validation split is empty")
    threads = _thread_count(config) if threads is None else threads
    crop_seed_base = config.crop_seed if crop_seed_base is None else crop_seed_base
    started = time.perf_counter()

    all_entries = list(train_entries) + list(val_entries)
    samples = extract_dataset(all_entries, config, crop_seed_base,
                              loader=loader, threads=threads)
    n_train_videos = len(train_entries)
    train_samples = [s for s in samples if s.video_index < n_train_videos]
    val_samples = [s for s in samples if s.video_index >= n_train_videos]
    if not train_samples or not val_samples:
        raise FitError("both splits must produce at least one cube")

    options = FitOptions(
        pca_per_channel_n=config.pca_per_channel_n,
        fit_min_samples=config.fit_min_samples,
        fit_max_patches=config.fit_max_patches,
    )
    train_images = [s.sub_image for s in train_samples]
    train_subcubes = [s.sub_cube for s in train_samples]

    spatial = SpatialPipeline.fit(train_images, options)
    spatio_color = SpatioColorPipeline.fit(train_images, options)
    spatio_temporal = SpatioTemporalPipeline.fit(train_subcubes, options)
    temporal = TemporalPipeline.fit(
        [s.temporal_raw for s in train_samples],
        sub_video_len=config.sub_video_len,
        block_size=config.mv_block_size,
        search_range=config.mv_search_range,
        sig_threshold=config.mv_sig_threshold,
        spectral_enabled=config.temporal_spectral_enabled,
        spectral_n=config.temporal_spectral_n)

    pipelines = {"spatial": spatial, "spatio_color": spatio_color,
                 "temporal": temporal, "spatio_temporal": spatio_temporal}
    train_feats = _generate_matrix(train_samples, pipelines, threads)
    val_feats = _generate_matrix(val_samples, pipelines, threads)

    train_labels = np.array([s.mos for s in train_samples], dtype=np.float64)
    val_labels = np.array([s.mos for s in val_samples], dtype=np.float64)

    results = {kind: run_rft(train_feats[kind], train_labels, kind=kind,
                             n_partitions=config.rft_partitions)
               for kind in KINDS}
    selector = select_features(results, config.select_counts())

    x_train = selector.gather(train_feats)
    x_val = selector.gather(val_feats)
    gbdt = train_gbdt(x_train, train_labels, x_val, val_labels, TrainConfig(
        max_depth=config.gbdt_max_depth,
        subsample=config.gbdt_subsample,
        max_trees=config.gbdt_max_trees,
        learning_rate=config.gbdt_learning_rate,
        early_stop_patience=config.gbdt_patience,
        min_samples_leaf=config.gbdt_min_samples_leaf,
        seed=gbdt_seed,
    ))

    model = TrainedModel(
        format_version=FORMAT_VERSION,
        config=config,
        spatial=spatial, spatio_color=spatio_color,
        temporal=temporal, spatio_temporal=spatio_temporal,
        selector=selector, gbdt=gbdt,
        metadata={
            "library_version": _library_version,
            "dataset_hash": _dataset_hash(all_entries),
            "crop_seed_base": int(crop_seed_base),
            "gbdt_seed": int(gbdt_seed),
            "dims": {k: int(train_feats[k].shape[1]) for k in KINDS},
            "fit_video_paths": sorted({e.path for e in train_entries}
                                      | {e.path for e in val_entries}),
        },
    )
    val_rmse = (min(gbdt.val_rmse_history) if gbdt.val_rmse_history
                else float("nan"))
    report = TrainReport(
        dims=model.dims(),
        selected=selector.counts(),
        num_train_cubes=len(train_samples),
        num_val_cubes=len(val_samples),
        num_trees=gbdt.num_trees,
        val_rmse=val_rmse,
        fit_seconds=time.perf_counter() - started,
    )
    return model, report


def score_stages(model: TrainedModel, clip: VideoClip, threads: int = 1):
    """Score a clip, returning (ScoreReport, per-stage seconds)."""
    config = model.config
    stages: dict[str, float] = {}

    t0 = time.perf_counter()
    samples = extract_cube_samples(clip, config, config.crop_seed,
                                   eager_temporal=False)
    stages["cropping"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    pipelines = {"spatial": model.spatial, "spatio_color": model.spatio_color,
                 "temporal": model.temporal,
                 "spatio_temporal": model.spatio_temporal}
    feats = _generate_matrix(samples, pipelines, threads)
    stages["representations"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    gathered = model.selector.gather(feats)
    stages["selection"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cube_scores = model.gbdt.predict(gathered)
    stages["regression"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    n_sub = max(s.subvideo_index for s in samples) + 1
    grouped: list[list[float]] = [[] for _ in range(n_sub)]
    for sample, score in zip(samples, cube_scores):
        grouped[sample.subvideo_index].append(float(score))
    report = ensemble_scores(grouped)
    stages["ensembling"] = time.perf_counter() - t0
    return report, stages


def score_clip(model: TrainedModel, clip: VideoClip, threads: int = 1) -> ScoreReport:
    """Predict the quality of one clip with a trained model."""
    report, _ = score_stages(model, clip, threads=threads)
    return report
