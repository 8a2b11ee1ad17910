"""Command-line entry points: train, predict, evaluate, bench, synth.

Output is flat `key=value` lines on stdout so runs are easy to diff and
grep.  Exit codes: 0 success, 2 missing manifest/input file, 3 model format
version mismatch, 4 clip too short, 1 any other pipeline error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

import numpy as np

from .config import RunConfig
from .errors import BvqaError, ConfigError, TooShortError, VersionError
from .media_io import (
    SynthSpec,
    load_manifest,
    load_video,
    synthesize_clip,
    write_y4m,
)
from .pipeline import score_clip, train_model
from .model_store import load_model, save_model

_PATTERN_CYCLE = ("drift", "waves", "blobs")


def _emit(key: str, value) -> None:
    if isinstance(value, float):
        value = f"{value:.6f}"
    print(f"{key}={value}")


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    if not os.path.exists(path):
        raise FileNotFoundError(2, "config file not found", path)
    return RunConfig.from_file(path)


def _require_file(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(2, f"{what} not found", path)
    return path


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    config_frames = args.frames
    if args.count is None:
        spec = SynthSpec(base_pattern=args.pattern, noise_sigma=args.noise,
                         blur_radius=args.blur, seed=args.seed,
                         width=args.width, height=args.height,
                         num_frames=config_frames,
                         frame_rate=Fraction(args.rate))
        clip, mos = synthesize_clip(spec)
        write_y4m(clip, args.out)
        _emit("clip", args.out)
        _emit("pseudo_mos", mos)
        return 0

    # Dataset mode: --count clips under --out/, plus a manifest with
    # pseudo-MOS labels.  Distortion levels are drawn uniformly per clip.
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence([0xDA7A, args.seed]))
    rows = []
    for i in range(args.count):
        sigma = float(rng.uniform(0.0, args.max_noise))
        blur = float(rng.uniform(0.0, args.max_blur))
        spec = SynthSpec(base_pattern=_PATTERN_CYCLE[i % len(_PATTERN_CYCLE)],
                         noise_sigma=sigma, blur_radius=blur,
                         seed=args.seed * 100003 + i,
                         width=args.width, height=args.height,
                         num_frames=config_frames,
                         frame_rate=Fraction(args.rate))
        clip, mos = synthesize_clip(spec)
        path = os.path.join(args.out, f"clip_{i:04d}.y4m")
        write_y4m(clip, path)
        rows.append((path, mos))
    manifest_path = os.path.join(args.out, "manifest.csv")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write("path,mos\n")
        for path, mos in rows:
            fh.write(f"{path},{mos:.6f}\n")
    _emit("clips", args.count)
    _emit("manifest", manifest_path)
    return 0


# ---------------------------------------------------------------------------
# train

def _split_entries(entries, config: RunConfig, seed: int):
    tagged = [e for e in entries if e.split != "unassigned"]
    if tagged:
        train = [e for e in entries if e.split == "train"]
        val = [e for e in entries if e.split == "val"]
        if not train or not val:
            raise ConfigError(
                "manifest split column must tag at least one train "
                "and one val video")
        return train, val
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5317]))
    perm = rng.permutation(len(entries))
    n_val = max(1, int(round(config.val_fraction * len(entries))))
    if n_val >= len(entries):
        raise ConfigError(f"{len(entries)} videos leave no training split")
    val = [entries[i] for i in perm[:n_val]]
    train = [entries[i] for i in perm[n_val:]]
    return train, val


def cmd_train(args) -> int:
    manifest = load_manifest(_require_file(args.manifest, "manifest"))
    config = _load_config(args.config)
    if args.threads is not None:
        config.threads = args.threads
    config.validate()
    train, val = _split_entries(list(manifest.entries), config, args.seed)

    model, report = train_model(train, val, config, gbdt_seed=args.seed,
                                crop_seed_base=args.seed,
                                threads=config.threads or None)
    size = save_model(model, args.out)

    _emit("videos_train", len(train))
    _emit("videos_val", len(val))
    _emit("cubes_train", report.num_train_cubes)
    _emit("cubes_val", report.num_val_cubes)
    for kind, dim in report.dims.items():
        _emit(f"dim_{kind}", dim)
    for kind, count in report.selected.items():
        _emit(f"selected_{kind}", count)
    _emit("trees", report.num_trees)
    _emit("val_rmse", report.val_rmse)
    _emit("fit_seconds", report.fit_seconds)
    _emit("model_bytes", size)
    _emit("model", args.out)
    return 0


# ---------------------------------------------------------------------------
# predict

def cmd_predict(args) -> int:
    model = load_model(_require_file(args.model, "model"))
    clip = load_video(_require_file(args.input, "input video"))
    threads = args.threads if args.threads is not None else 1
    report = score_clip(model, clip, threads=threads)
    for i, score in enumerate(report.sub_video_scores):
        _emit(f"sub_video_{i}", float(score))
    _emit("video_score", float(report.video_score))
    return 0


# ---------------------------------------------------------------------------
# evaluate

def cmd_evaluate(args) -> int:
    from .evaluation import run_protocol  # import here keeps startup light

    manifest = load_manifest(_require_file(args.manifest, "manifest"))
    config = _load_config(args.config)
    if args.threads is not None:
        config.threads = args.threads
    result = run_protocol(manifest, config, runs=args.runs, seed=args.seed,
                          threads=config.threads or None)
    for run in result.runs:
        _emit(f"run_{run.run_index}_plcc", run.plcc)
        _emit(f"run_{run.run_index}_srocc", run.srocc)
    _emit("median_plcc", result.median_plcc)
    _emit("median_srocc", result.median_srocc)
    return 0


# ---------------------------------------------------------------------------
# bench

def cmd_bench(args) -> int:
    from .evaluation import benchmark

    model_path = _require_file(args.model, "model")
    model = load_model(model_path)
    clip = load_video(_require_file(args.input, "input video"))
    report = benchmark(model, clip, repeats=args.repeats,
                       threads=args.threads if args.threads is not None else 1)
    for stage, seconds in report.stage_seconds.items():
        _emit(f"stage_{stage}_seconds", seconds)
    _emit("total_seconds", report.total_seconds)
    _emit("flop_estimate", report.flop_estimate)
    _emit("model_size", os.path.getsize(model_path))
    _emit("video_score", report.video_score)
    return 0


# ---------------------------------------------------------------------------
# Parser plumbing

def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bvqa",
        description="Blind video quality assessment: train, score, benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize distorted test clips")
    p.add_argument("--out", required=True,
                   help="output .y4m path, or a directory with --count")
    p.add_argument("--count", type=int, default=None,
                   help="generate a dataset of this many clips plus manifest")
    p.add_argument("--pattern", default="drift",
                   choices=_PATTERN_CYCLE, help="base texture pattern")
    p.add_argument("--noise", type=float, default=0.0, help="noise sigma")
    p.add_argument("--blur", type=float, default=0.0, help="blur radius")
    p.add_argument("--max-noise", type=float, default=25.0,
                   help="dataset mode: upper bound for per-clip noise")
    p.add_argument("--max-blur", type=float, default=3.0,
                   help="dataset mode: upper bound for per-clip blur")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=352)
    p.add_argument("--height", type=int, default=352)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--rate", default="30", help="frame rate (e.g. 30 or 30000/1001)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit the full pipeline from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--out", "--model", dest="out", required=True,
                   help="output model path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score one video with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="video file (.y4m)")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run the randomized split protocol")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time the scoring stages on one clip")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        name = getattr(exc, "filename", None) or exc
        print(f"error: file not found: {name}", file=sys.stderr)
        return 2
    except VersionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TooShortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except BvqaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
