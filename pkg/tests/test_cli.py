import json
import subprocess
import sys

import numpy as np
import pytest

from shotconv.cli import main
from shotconv.dataset import load_dataset
from shotconv.frameio import write_ppm, write_rgb24
from shotconv.model import build_model, load_weights, save_weights
from shotconv.synthetic import procedural_clip


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def tiny_dataset_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "ds"
    code = run_cli(
        "generate",
        "--procedural", "3",
        "--counts", "cut=8,none=8",
        "--clip-frames", "30",
        "--seed", "1",
        "--out", str(out),
    )
    assert code == 0
    return out


@pytest.fixture(scope="module")
def weights_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "model.sbdw"
    save_weights(build_model(0), path)
    return path


class TestGenerate:
    def test_writes_loadable_dataset(self, tiny_dataset_dir):
        ds = load_dataset(tiny_dataset_dir)
        assert len(ds) == 16
        assert int((ds.center_labels == 0).sum()) == 8

    def test_rerun_is_byte_identical(self, tiny_dataset_dir, tmp_path):
        out = tmp_path / "again"
        code = run_cli(
            "generate",
            "--procedural", "3",
            "--counts", "cut=8,none=8",
            "--clip-frames", "30",
            "--seed", "1",
            "--out", str(out),
        )
        assert code == 0
        for name in ("manifest.json", "snippets.bin"):
            assert (out / name).read_bytes() == (tiny_dataset_dir / name).read_bytes()

    def test_missing_out_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            run_cli("generate", "--procedural", "2")
        assert err.value.code == 2

    def test_bad_counts_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            run_cli("generate", "--procedural", "2", "--out", "x", "--counts", "cut")
        assert err.value.code == 2

    def test_sources_from_ppm_clips(self, tmp_path, rng):
        root = tmp_path / "clips"
        for c in range(2):
            clip_dir = root / f"clip{c}"
            clip_dir.mkdir(parents=True)
            clip = procedural_clip(c, 26)
            for i, frame in enumerate(clip):
                write_ppm(frame, clip_dir / f"{i:05d}.ppm")
        out = tmp_path / "ds"
        code = run_cli(
            "generate", "--sources", str(root), "--counts", "cut=4,none=4",
            "--seed", "0", "--out", str(out),
        )
        assert code == 0
        assert len(load_dataset(out)) == 8


class TestTrain:
    def test_trains_and_writes_weights(self, tiny_dataset_dir, tmp_path, capsys):
        weights = tmp_path / "model.sbdw"
        log = tmp_path / "log.jsonl"
        code = run_cli(
            "train",
            "--data", str(tiny_dataset_dir),
            "--out", str(weights),
            "--epochs", "2",
            "--eval-fraction", "0.25",
            "--log", str(log),
        )
        assert code == 0
        load_weights(weights)
        lines = [json.loads(l) for l in log.read_text().splitlines()]
        assert [l["epoch"] for l in lines] == [1, 2]
        assert "holdout_accuracy" in lines[-1]
        out = capsys.readouterr().out
        assert "held-out accuracy" in out

    def test_zero_epochs_equals_initialization(self, tiny_dataset_dir, tmp_path):
        weights = tmp_path / "init.sbdw"
        code = run_cli(
            "train", "--data", str(tiny_dataset_dir), "--out", str(weights),
            "--epochs", "0", "--seed", "5",
        )
        assert code == 0
        loaded = load_weights(weights)
        reference = build_model(5)
        for a, b in zip(loaded.layers, reference.layers):
            np.testing.assert_array_equal(a.weights, b.weights)

    def test_negative_lr_is_usage_error(self, tiny_dataset_dir, tmp_path):
        with pytest.raises(SystemExit) as err:
            run_cli(
                "train", "--data", str(tiny_dataset_dir),
                "--out", str(tmp_path / "w"), "--lr", "-1",
            )
        assert err.value.code == 2

    def test_corrupt_dataset_is_runtime_error(self, tmp_path, capsys):
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "manifest.json").write_text("{broken", encoding="utf-8")
        code = run_cli("train", "--data", str(bad), "--out", str(tmp_path / "w"))
        assert code == 1
        assert capsys.readouterr().err.startswith("error:")


class TestDetect:
    def make_video(self, tmp_path, t=24, size=64):
        rng = np.random.default_rng(7)
        frames = rng.random((t, size, size, 3)).astype(np.float32)
        path = tmp_path / "video.rgb24"
        write_rgb24(frames, path)
        return path

    def test_detect_writes_report(self, weights_file, tmp_path, capsys):
        video = self.make_video(tmp_path)
        out = tmp_path / "det.json"
        probs = tmp_path / "probs.csv"
        code = run_cli(
            "detect", "--weights", str(weights_file), "--input", str(video),
            "--width", "64", "--height", "64",
            "--out", str(out), "--probs", str(probs),
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["total_frames"] == 24
        assert report["video"] == "video.rgb24"
        covered = sum(s["end_frame"] - s["start_frame"] + 1 for s in report["shots"])
        gradual = sum(
            t["end_frame"] - t["start_frame"] + 1
            for t in report["transitions"]
            if t["kind"] == "gradual"
        )
        assert covered + gradual == 24
        lines = probs.read_text().strip().splitlines()
        assert len(lines) == 1 + (24 - 9)
        err = capsys.readouterr().err
        assert "resize skipped" in err
        assert "real-time factor" in err

    def test_detect_resizes_larger_input(self, weights_file, tmp_path, capsys):
        video = self.make_video(tmp_path, t=12, size=96)
        code = run_cli(
            "detect", "--weights", str(weights_file), "--input", str(video),
            "--width", "96", "--height", "96", "--out", str(tmp_path / "d.json"),
        )
        assert code == 0
        assert "resizing 96x96" in capsys.readouterr().err

    def test_detect_ppm_directory(self, weights_file, tmp_path):
        clip_dir = tmp_path / "frames"
        clip_dir.mkdir()
        for i, frame in enumerate(procedural_clip(3, 15)):
            write_ppm(frame, clip_dir / f"{i:04d}.ppm")
        out = tmp_path / "det.json"
        code = run_cli(
            "detect", "--weights", str(weights_file),
            "--input", str(clip_dir), "--out", str(out),
        )
        assert code == 0
        assert json.loads(out.read_text())["total_frames"] == 15

    def test_deterministic_json(self, weights_file, tmp_path):
        video = self.make_video(tmp_path)
        outs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert run_cli(
                "detect", "--weights", str(weights_file), "--input", str(video),
                "--width", "64", "--height", "64", "--out", str(out),
            ) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_short_video_fails_with_message(self, weights_file, tmp_path, capsys):
        video = self.make_video(tmp_path, t=6)
        code = run_cli(
            "detect", "--weights", str(weights_file), "--input", str(video),
            "--width", "64", "--height", "64",
        )
        assert code == 1
        assert "shorter than receptive field" in capsys.readouterr().err

    def test_raw_input_requires_dimensions(self, weights_file, tmp_path):
        video = self.make_video(tmp_path)
        with pytest.raises(SystemExit) as err:
            run_cli("detect", "--weights", str(weights_file), "--input", str(video))
        assert err.value.code == 2


class TestEval:
    def write_detection(self, path, video, transitions):
        payload = {
            "video": video,
            "total_frames": 100,
            "fps": 25.0,
            "shots": [],
            "transitions": [
                {"start_frame": a, "end_frame": b, "kind": "cut" if a == b else "gradual"}
                for a, b in transitions
            ],
        }
        path.write_text(json.dumps(payload), encoding="utf-8")

    def test_eval_report(self, tmp_path, capsys):
        det = tmp_path / "v1.json"
        self.write_detection(det, "v1", [(11, 13), (70, 70)])
        truth = tmp_path / "v1.tsv"
        truth.write_text("10\t12\n50\t50\n", encoding="utf-8")
        report_path = tmp_path / "report.json"
        code = run_cli(
            "eval", "--detections", str(det), "--truth", str(truth),
            "--report", str(report_path),
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "v1" in out and "0.500" in out
        report = json.loads(report_path.read_text())
        assert report["mean_f1"] == pytest.approx(0.5)

    def test_unpaired_files_usage_error(self, tmp_path):
        det = tmp_path / "v1.json"
        self.write_detection(det, "v1", [])
        with pytest.raises(SystemExit) as err:
            run_cli("eval", "--detections", str(det), "--truth", "a.tsv", "b.tsv")
        assert err.value.code == 2


class TestBench:
    def test_small_bench_reports_modes(self, weights_file, capsys):
        code = run_cli(
            "bench", "--weights", str(weights_file), "--frames", "60",
            "--repeat", "1",
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "equivalence check passed" in out
        assert "fullyconv:" in out and "sliding:" in out
        assert "speedup" in out

    def test_single_mode(self, weights_file, capsys):
        code = run_cli(
            "bench", "--weights", str(weights_file), "--frames", "40",
            "--repeat", "1", "--mode", "fullyconv",
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "sliding:" not in out.replace("fullyconv:", "")
        assert "speedup" not in out

    def test_default_initialization_without_weights(self, capsys):
        code = run_cli("bench", "--frames", "30", "--repeat", "1", "--mode", "fullyconv")
        assert code == 0
        assert "equivalence check passed" in capsys.readouterr().out


def test_module_entry_point_help():
    result = subprocess.run(
        [sys.executable, "-m", "shotconv", "--help"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "generate" in result.stdout and "bench" in result.stdout


def test_console_script_usage_exit_code():
    result = subprocess.run(
        [sys.executable, "-m", "shotconv", "train"], capture_output=True, text=True
    )
    assert result.returncode == 2
