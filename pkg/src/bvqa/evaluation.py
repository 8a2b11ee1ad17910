"""Correlation metrics, the randomized split protocol, and cost benchmarks.

PLCC is the Pearson correlation of predicted vs. subjective scores; SROCC is
the Pearson correlation of their average ranks, which reduces to the classic
1 - 6*sum(d^2)/(L(L^2-1)) form when there are no ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import BvqaError, ConfigError, DegenerateError
from .media_io import load_video
from .pipeline import TrainedModel, score_stages, train_model

__all__ = [
    "PredictionPairs", "plcc", "srocc", "run_protocol", "ProtocolResult",
    "RunScore", "benchmark", "CostReport", "estimate_flops",
]


@dataclass(frozen=True)
class PredictionPairs:
    predicted: np.ndarray
    subjective: np.ndarray


def _pair_arrays(pairs):
    if isinstance(pairs, PredictionPairs):
        a = np.asarray(pairs.predicted, dtype=np.float64).ravel()
        b = np.asarray(pairs.subjective, dtype=np.float64).ravel()
    else:
        arr = np.asarray(pairs, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DegenerateError(
                f"expected (n, 2) prediction pairs, got shape {arr.shape}")
        a, b = arr[:, 0], arr[:, 1]
    if a.shape[0] != b.shape[0]:
        raise DegenerateError("predicted and subjective lengths differ")
    if a.shape[0] < 3:
        raise DegenerateError(
            f"correlation needs at least 3 pairs, got {a.shape[0]}")
    return a, b


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    na, nb = np.sqrt((da * da).sum()), np.sqrt((db * db).sum())
    if na == 0.0 or nb == 0.0:
        raise DegenerateError("correlation undefined for a constant sequence")
    return float((da * db).sum() / (na * nb))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.shape[0])
    sorted_vals = values[order]
    i = 0
    while i < values.shape[0]:
        j = i
        while j + 1 < values.shape[0] and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # 1-based average rank
        i = j + 1
    return ranks


def plcc(pairs) -> float:
    """Pearson linear correlation of predicted vs. subjective scores."""
    a, b = _pair_arrays(pairs)
    return _pearson(a, b)


def srocc(pairs) -> float:
    """Spearman rank-order correlation (average ranks on ties)."""
    a, b = _pair_arrays(pairs)
    return _pearson(_average_ranks(a), _average_ranks(b))


# ---------------------------------------------------------------------------
# Randomized split protocol

@dataclass(frozen=True)
class RunScore:
    run_index: int
    split_seed: int
    plcc: float
    srocc: float
    num_test_videos: int


@dataclass(frozen=True)
class ProtocolResult:
    runs: tuple[RunScore, ...]
    median_plcc: float
    median_srocc: float


def _split_sizes(n_videos: int, test_fraction: float, val_fraction: float):
    n_test = max(1, int(round(n_videos * test_fraction)))
    if n_test < 3:
        raise ConfigError(
            f"test split of {n_test} videos cannot support correlation; "
            "add videos or raise test_fraction")
    n_trainval = n_videos - n_test
    n_val = max(1, int(round(n_trainval * val_fraction)))
    n_train = n_trainval - n_val
    if n_train < 1:
        raise ConfigError(
            f"{n_videos} videos leave no training split at these fractions")
    return n_train, n_val, n_test


def run_protocol(manifest, config: RunConfig, runs: int = 10, seed: int = 0,
                 loader=load_video, threads: int | None = None) -> ProtocolResult:
    """Random 80/20 video-level splits with a val share carved from train.

    Each run reshuffles the split *and* the cropping seed, refits the whole
    pipeline from scratch on the training split, and scores the held-out
    videos; reported figures are medians across runs.  A given (manifest,
    config, runs, seed) is fully deterministic.
    """
    entries = list(getattr(manifest, "entries", manifest))
    if len(entries) < 10:
        raise ConfigError(f"protocol needs at least 10 videos, got {len(entries)}")
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    config.validate()
    n_train, n_val, n_test = _split_sizes(
        len(entries), config.test_fraction, config.val_fraction)

    scores = []
    for run in range(runs):
        root = np.random.SeedSequence([seed, run])
        split_rng = np.random.default_rng(root.spawn(1)[0])
        crop_seed_base = int(root.generate_state(2)[1])
        gbdt_seed = int(np.random.SeedSequence([seed, run, 7]).generate_state(1)[0])

        perm = split_rng.permutation(len(entries))
        test_idx = perm[:n_test]
        val_idx = perm[n_test:n_test + n_val]
        train_idx = perm[n_test + n_val:]
        train = [entries[i] for i in train_idx]
        val = [entries[i] for i in val_idx]
        test = [entries[i] for i in test_idx]

        model, _ = train_model(train, val, config, gbdt_seed=gbdt_seed,
                               crop_seed_base=crop_seed_base, loader=loader,
                               threads=threads)
        _audit_no_leak(model, test)

        predicted, subjective = [], []
        for entry in test:
            clip = loader(entry.path)
            report = score_stages(model, clip,
                                  threads=threads or config.threads or 1)[0]
            predicted.append(report.video_score)
            subjective.append(entry.mos)
        pairs = PredictionPairs(np.array(predicted), np.array(subjective))
        scores.append(RunScore(
            run_index=run,
            split_seed=crop_seed_base,
            plcc=plcc(pairs),
            srocc=srocc(pairs),
            num_test_videos=len(test),
        ))

    return ProtocolResult(
        runs=tuple(scores),
        median_plcc=float(np.median([s.plcc for s in scores])),
        median_srocc=float(np.median([s.srocc for s in scores])),
    )


def _audit_no_leak(model: TrainedModel, test_entries) -> None:
    fitted = set(model.metadata.get("fit_video_paths", ()))
    leaked = fitted & {e.path for e in test_entries}
    if leaked:
        raise BvqaError(f"test videos reached a fit operation: {sorted(leaked)}")


# ---------------------------------------------------------------------------
# Cost accounting

# FLOP conventions: one multiply-accumulate = 2 FLOPs; one fused absolute-
# difference-accumulate (the SAD inner op, a single instruction on SIMD
# hardware) = 1 FLOP; comparisons and max-pooling are free.  Decode is
# excluded.  Counts are closed-form from the clip geometry and the fitted
# kernel shapes, ignoring boundary clipping of the motion search.

def _saab_flops(kernel, placements: int) -> int:
    return placements * 2 * kernel.patch_len * kernel.num_ac


def _pca_flops(bases) -> int:
    return sum(2 * b.mean.shape[0] * b.k for b in bases)


def _std_flops(n_channels: int, extent: int) -> int:
    return 2 * n_channels * extent


def _spatial_flops(model: TrainedModel) -> int:
    size = model.spatial.input_size
    grid_dct = (size // 8) ** 2
    hop1_grid = ((size // 8 - 4) // 2 + 1) ** 2
    hop2_grid = (((size // 8 - 4) // 2 + 1 - 3) // 2 + 1) ** 2
    total = grid_dct * 2 * 64 * 64  # direct 2-D counting: 64 coeffs x 64 MACs
    total += _saab_flops(model.spatial.hop1, hop1_grid)
    total += sum(_saab_flops(k, hop2_grid) for k in model.spatial.hop2)
    total += _pca_flops(model.spatial.mid_pca)
    total += _std_flops(63, (size // 8 // 4) ** 2)
    return total


def _spatio_color_flops(model: TrainedModel) -> int:
    size = model.spatio_color.input_size
    hop1_grid = (size // 2 // 4) ** 2
    hop2_grid = (size // 2 // 4 // 4) ** 2
    high_extent = (size // 2 // 4 // 2) ** 2
    total = _saab_flops(model.spatio_color.hop1, hop1_grid)
    total += sum(_saab_flops(k, hop2_grid) for k in model.spatio_color.hop2)
    total += _pca_flops(model.spatio_color.low_pca)
    total += _pca_flops(model.spatio_color.high_pca)
    total += _std_flops(len(model.spatio_color.low_pca), hop2_grid)
    total += _std_flops(len(model.spatio_color.high_pca), high_extent)
    return total


def _spatio_temporal_flops(model: TrainedModel) -> int:
    t, h, w = model.spatio_temporal.input_dims
    hop1_grid = (h // 8) * (w // 8) * (t // 3)
    hop2_grid = (h // 8 // 2) * (w // 8 // 2)
    high_extent = (h // 8 // 2) * (w // 8 // 2) * (t // 3)
    total = _saab_flops(model.spatio_temporal.hop1, hop1_grid)
    total += sum(_saab_flops(k, hop2_grid) for k in model.spatio_temporal.hop2)
    total += _pca_flops(model.spatio_temporal.low_pca)
    total += _pca_flops(model.spatio_temporal.high_pca)
    total += _std_flops(len(model.spatio_temporal.low_pca), hop2_grid)
    total += _std_flops(len(model.spatio_temporal.high_pca), high_extent)
    return total


def _temporal_flops(config: RunConfig) -> int:
    blocks = (config.sub_image_size // config.mv_block_size) ** 2
    candidates = (2 * config.mv_search_range + 1) ** 2
    per_pair = blocks * candidates * config.mv_block_size ** 2  # fused SAD ops
    stats = 20 * blocks  # per-field statistics, small by comparison
    return (config.sub_video_len - 1) * (per_pair + stats)


def estimate_flops(model: TrainedModel, width: int, height: int,
                   num_frames: int) -> int:
    """Closed-form FLOP estimate for scoring one clip with this model."""
    config = model.config
    n_sub_videos = num_frames // config.sub_video_len
    n_cubes = n_sub_videos * config.sub_images_per_frame
    per_cube = (_spatial_flops(model)
                + _spatio_color_flops(model)
                + _temporal_flops(config)
                + _spatio_temporal_flops(model))
    gbdt = n_cubes * model.gbdt.num_trees * config.gbdt_max_depth
    return n_cubes * per_cube + gbdt


@dataclass(frozen=True)
class CostReport:
    stage_seconds: dict[str, float]
    total_seconds: float
    flop_estimate: int
    model_size_bytes: int
    video_score: float


def benchmark(model: TrainedModel, clip, repeats: int = 5,
              threads: int = 1) -> CostReport:
    """Score a clip `repeats` times and report median per-stage wall times."""
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    from .model_store import serialize  # local import avoids a cycle

    timings: list[dict[str, float]] = []
    report = None
    for _ in range(repeats):
        report, stages = score_stages(model, clip, threads=threads)
        timings.append(stages)
    stage_names = list(timings[0])
    medians = {name: float(np.median([t[name] for t in timings]))
               for name in stage_names}
    return CostReport(
        stage_seconds=medians,
        total_seconds=float(sum(medians.values())),
        flop_estimate=estimate_flops(model, clip.width, clip.height,
                                     clip.num_frames),
        model_size_bytes=len(serialize(model)),
        video_score=report.video_score,
    )
