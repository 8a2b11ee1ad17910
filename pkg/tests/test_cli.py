"""Command-line interface: outputs, determinism, exit codes."""

import math
import os
import shutil

import pytest

from bvqa.cli import main
from bvqa.media_io import load_manifest, load_video

TINY_CONFIG = """\
# small geometry for fast runs
sub_image_size = 64
sub_cube_dims = 32, 32, 15
sub_images_per_frame = 2
mv_search_range = 2
fit_min_samples = 8
fit_max_patches = 20000
select_spatial = 60
select_spatio_color = 100
select_temporal = 80
select_spatio_temporal = 150
gbdt_max_trees = 30
gbdt_max_depth = 3
gbdt_min_samples_leaf = 2
gbdt_patience = 10
threads = 1
"""


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    values = {}
    for line in captured.out.splitlines():
        key, sep, value = line.partition("=")
        if sep:
            values[key] = value
    return code, values, captured


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Synthetic dataset, config file, and a model trained through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "run.cfg"
    config.write_text(TINY_CONFIG)

    data = root / "data"
    code = main(["synth", "--out", str(data), "--count", "12", "--seed", "3",
                 "--width", "64", "--height", "64", "--frames", "30"])
    assert code == 0

    model = root / "model.gbvq"
    code = main(["train", "--manifest", str(data / "manifest.csv"),
                 "--config", str(config), "--out", str(model), "--seed", "5"])
    assert code == 0
    return {"root": root, "config": config, "data": data, "model": model}


def test_synth_single_clip(tmp_path, capsys):
    out = tmp_path / "one.y4m"
    code, values, _ = run_cli(
        ["synth", "--out", str(out), "--pattern", "waves", "--noise", "5",
         "--blur", "1", "--seed", "2", "--width", "64", "--height", "64",
         "--frames", "30"], capsys)
    assert code == 0
    assert values["clip"] == str(out)
    expected_mos = 100.0 * math.exp(-0.05 * 5.0 - 0.3 * 1.0)
    assert float(values["pseudo_mos"]) == pytest.approx(expected_mos, abs=1e-6)
    clip = load_video(out)
    assert clip.num_frames == 30
    assert (clip.width, clip.height) == (64, 64)


def test_synth_dataset_layout(workspace):
    manifest = load_manifest(workspace["data"] / "manifest.csv")
    assert len(manifest.entries) == 12
    for entry in manifest.entries:
        assert os.path.exists(entry.path)
        assert 0.0 < entry.mos <= 100.0


def test_train_reports_and_is_reproducible(workspace, tmp_path, capsys):
    second = tmp_path / "again.gbvq"
    code, values, _ = run_cli(
        ["train", "--manifest", str(workspace["data"] / "manifest.csv"),
         "--config", str(workspace["config"]), "--out", str(second),
         "--seed", "5"], capsys)
    assert code == 0
    assert values["videos_train"] == "11"
    assert values["videos_val"] == "1"
    assert values["cubes_train"] == "22"
    assert values["dim_spatial"] == "103"
    assert values["dim_spatio_color"] == "645"
    assert values["dim_temporal"] == "420"
    assert values["dim_spatio_temporal"] == "2092"
    assert values["selected_spatial"] == "60"
    assert values["selected_temporal"] == "80"
    assert int(values["trees"]) >= 1
    assert int(values["model_bytes"]) == second.stat().st_size
    assert values["model"] == str(second)

    # same manifest, config, and seed: byte-identical model artifact
    assert second.read_bytes() == workspace["model"].read_bytes()


def test_predict_deterministic_and_ranks_distortion(workspace, tmp_path, capsys):
    clean = tmp_path / "clean.y4m"
    noisy = tmp_path / "noisy.y4m"
    for path, sigma in ((clean, "0"), (noisy, "20")):
        assert main(["synth", "--out", str(path), "--pattern", "waves",
                     "--noise", sigma, "--seed", "77", "--width", "64",
                     "--height", "64", "--frames", "30"]) == 0
        capsys.readouterr()

    code, first, _ = run_cli(["predict", "--model", str(workspace["model"]),
                              "--input", str(clean)], capsys)
    assert code == 0
    assert "sub_video_0" in first
    code, second, _ = run_cli(["predict", "--model", str(workspace["model"]),
                               "--input", str(clean)], capsys)
    assert first == second

    code, noisy_vals, _ = run_cli(["predict", "--model", str(workspace["model"]),
                                   "--input", str(noisy)], capsys)
    assert code == 0
    assert float(first["video_score"]) > float(noisy_vals["video_score"])


def test_exit_code_missing_files(workspace, tmp_path, capsys):
    code, _, captured = run_cli(
        ["train", "--manifest", str(tmp_path / "absent.csv"),
         "--out", str(tmp_path / "m.gbvq")], capsys)
    assert code == 2
    assert "absent.csv" in captured.err

    code, _, captured = run_cli(
        ["predict", "--model", str(workspace["model"]),
         "--input", str(tmp_path / "nope.y4m")], capsys)
    assert code == 2
    assert "nope.y4m" in captured.err


def test_exit_code_version_mismatch(workspace, tmp_path, capsys):
    tampered = tmp_path / "tampered.gbvq"
    blob = bytearray(workspace["model"].read_bytes())
    blob[4] = 99  # format version field
    tampered.write_bytes(bytes(blob))
    clip = tmp_path / "c.y4m"
    assert main(["synth", "--out", str(clip), "--width", "64", "--height",
                 "64", "--frames", "30"]) == 0
    capsys.readouterr()
    code, _, captured = run_cli(
        ["predict", "--model", str(tampered), "--input", str(clip)], capsys)
    assert code == 3
    assert "version" in captured.err


def test_exit_code_too_short_clip(workspace, tmp_path, capsys):
    short = tmp_path / "short.y4m"
    assert main(["synth", "--out", str(short), "--width", "64", "--height",
                 "64", "--frames", "20"]) == 0
    capsys.readouterr()
    code, _, captured = run_cli(
        ["predict", "--model", str(workspace["model"]), "--input", str(short)],
        capsys)
    assert code == 4
    assert "frames" in captured.err


def test_evaluate_deterministic_output(workspace, tmp_path_factory, capsys):
    root = tmp_path_factory.mktemp("eval")
    data = root / "clips"
    assert main(["synth", "--out", str(data), "--count", "16", "--seed", "4",
                 "--width", "64", "--height", "64", "--frames", "30"]) == 0
    capsys.readouterr()

    argv = ["evaluate", "--manifest", str(data / "manifest.csv"),
            "--config", str(workspace["config"]), "--runs", "1", "--seed", "7"]
    code, first, cap_a = run_cli(argv, capsys)
    assert code == 0
    code, second, cap_b = run_cli(argv, capsys)
    assert cap_a.out == cap_b.out
    assert set(first) == {"run_0_plcc", "run_0_srocc",
                          "median_plcc", "median_srocc"}
    assert first["median_plcc"] == first["run_0_plcc"]
    assert -1.0 <= float(first["median_srocc"]) <= 1.0


def test_bench_reports_file_size(workspace, tmp_path, capsys):
    clip = tmp_path / "bench.y4m"
    assert main(["synth", "--out", str(clip), "--noise", "3", "--width", "64",
                 "--height", "64", "--frames", "30"]) == 0
    capsys.readouterr()
    code, values, _ = run_cli(
        ["bench", "--model", str(workspace["model"]), "--input", str(clip),
         "--repeats", "2"], capsys)
    assert code == 0
    assert int(values["model_size"]) == workspace["model"].stat().st_size
    assert int(values["flop_estimate"]) > 0
    for stage in ("cropping", "representations", "selection", "regression",
                  "ensembling"):
        assert f"stage_{stage}_seconds" in values
    total = sum(float(values[f"stage_{s}_seconds"])
                for s in ("cropping", "representations", "selection",
                          "regression", "ensembling"))
    assert float(values["total_seconds"]) == pytest.approx(total, abs=1e-4)
