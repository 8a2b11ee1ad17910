"""Shared fixtures: a small-geometry config and in-memory synthetic datasets.

The small geometry (64px sub-images, 32x32x15 sub-cubes) exercises every
pipeline stage in seconds instead of minutes; geometry-sensitive checks use
the default 320px configuration explicitly.
"""

import numpy as np
import pytest

from bvqa.config import RunConfig
from bvqa.media_io import ManifestEntry, SynthSpec, synthesize_clip
from bvqa.pipeline import train_model

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed, detail: str = "") -> None:
    status = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
    line = f"criterion {number}: {status}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tiny_config() -> RunConfig:
    cfg = RunConfig()
    cfg.sub_image_size = 64
    cfg.sub_cube_dims = (32, 32, 15)
    cfg.sub_images_per_frame = 2
    cfg.mv_search_range = 2
    cfg.fit_min_samples = 8
    cfg.fit_max_patches = 20000
    cfg.select_spatial = 60
    cfg.select_spatio_color = 100
    cfg.select_temporal = 80
    cfg.select_spatio_temporal = 150
    cfg.gbdt_max_trees = 30
    cfg.gbdt_max_depth = 3
    cfg.gbdt_min_samples_leaf = 2
    cfg.gbdt_patience = 10
    cfg.threads = 1
    cfg.validate()
    return cfg


def synth_entries(count: int, seed: int = 0, width: int = 64, height: int = 64,
                  num_frames: int = 30):
    """In-memory dataset: (entries, loader) without touching the filesystem."""
    rng = np.random.default_rng(np.random.SeedSequence([0xE27, seed]))
    clips, entries = {}, []
    patterns = ("drift", "waves", "blobs")
    for i in range(count):
        spec = SynthSpec(
            base_pattern=patterns[i % 3],
            noise_sigma=float(rng.uniform(0.0, 25.0)),
            blur_radius=float(rng.uniform(0.0, 3.0)),
            seed=seed * 1000 + i, width=width, height=height,
            num_frames=num_frames)
        clip, mos = synthesize_clip(spec)
        path = f"mem://{seed}/{i}"
        clips[path] = clip
        entries.append(ManifestEntry(path=path, mos=mos))
    return entries, clips.__getitem__


@pytest.fixture(scope="session")
def tiny_dataset():
    return synth_entries(12, seed=3)


@pytest.fixture(scope="session")
def tiny_model(tiny_dataset):
    """One small trained model shared by persistence/benchmark/CLI checks."""
    entries, loader = tiny_dataset
    cfg = tiny_config()
    model, report = train_model(entries[:10], entries[10:], cfg, gbdt_seed=1,
                                crop_seed_base=11, loader=loader, threads=1)
    return model, report
