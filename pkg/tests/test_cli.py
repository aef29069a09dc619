import csv
import json
import re

import numpy as np
import pytest

from kbnn.cli import main, parse_int_list

TIMING_KEYS = re.compile(r"(_seconds|_ms)$")


def strip_timing(obj):
    if isinstance(obj, dict):
        return {k: (None if TIMING_KEYS.search(k) else strip_timing(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


@pytest.fixture(autouse=True)
def single_worker(monkeypatch):
    monkeypatch.setenv("KBNN_THREADS", "1")


def run(*argv):
    return main([str(a) for a in argv])


class TestSynth:
    def test_cubic_csv(self, tmp_path):
        out = tmp_path / "cubic.csv"
        assert run("synth", "--kind", "cubic", "--n", 50, "--seed", 1,
                   "--out", out) == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 50
        assert set(rows[0]) == {"x", "y"}

    def test_moons_labels(self, tmp_path):
        out = tmp_path / "moons.csv"
        assert run("synth", "--kind", "moons", "--n", 40, "--seed", 1,
                   "--out", out) == 0
        rows = list(csv.DictReader(open(out)))
        assert {r["label"] for r in rows} == {"0", "1"}


class TestTrainEvalPredict:
    def test_round_trip(self, tmp_path, capsys):
        model = tmp_path / "model.json"
        report = tmp_path / "report.json"
        assert run("train", "--synth", "cubic", "--n", 120, "--arch", "1,10,1",
                   "--act", "relu,linear", "--epochs", 1, "--repeats", 2,
                   "--seed", 3, "--out-model", model, "--out-report", report) == 0
        doc = json.loads(report.read_text())
        assert doc["format"] == "kbnn-report-v1"
        assert len(doc["repeats"]) == 2
        assert doc["summary"]["rmse"]["std"] >= 0.0

        assert run("eval", "--model", model, "--synth", "cubic", "--n", 60,
                   "--seed", 9) == 0
        metrics = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert "rmse" in metrics and metrics["n"] == 60

        feats = tmp_path / "features.csv"
        feats.write_text("x\n0.5\n-1.0\n")
        preds = tmp_path / "preds.csv"
        assert run("predict", "--model", model, "--csv", feats,
                   "--out", preds) == 0
        rows = list(csv.DictReader(open(preds)))
        assert len(rows) == 2
        assert "mean_0" in rows[0] and "pre_activation_variance_0" in rows[0]

    def test_csv_training(self, tmp_path):
        data = tmp_path / "data.csv"
        rng = np.random.default_rng(0)
        lines = ["a,b,target"]
        for _ in range(40):
            a, b = rng.normal(size=2)
            lines.append(f"{a},{b},{a + 2 * b}")
        data.write_text("\n".join(lines) + "\n")
        report = tmp_path / "r.json"
        assert run("train", "--csv", data, "--target", "target",
                   "--arch", "2,5,1", "--act", "relu,linear",
                   "--out-report", report) == 0
        assert json.loads(report.read_text())["dataset"]["d"] == 2

    def test_arch_mismatch_fails(self, tmp_path, capsys):
        code = run("train", "--synth", "cubic", "--n", 60, "--arch", "3,5,1",
                   "--act", "relu,linear")
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_missing_source_fails(self):
        assert run("train", "--arch", "1,5,1", "--act", "relu,linear") == 1

    def test_verbose_streams_checkpoints(self, tmp_path, capsys):
        assert run("train", "--synth", "cubic", "--n", 60, "--arch", "1,4,1",
                   "--act", "relu,linear", "--eval-every", 25,
                   "--verbose") == 0
        err_lines = [l for l in capsys.readouterr().err.splitlines()
                     if l.startswith("{")]
        assert len(err_lines) == 2
        parsed = json.loads(err_lines[0])
        assert parsed["checkpoint"]["instances_seen"] == 25


class TestDeterminism:
    def test_seeded_outputs_identical_modulo_timing(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            model = tmp_path / f"model_{tag}.json"
            report = tmp_path / f"report_{tag}.json"
            assert run("train", "--synth", "moons", "--n", 200,
                       "--arch", "2,5,1", "--act", "relu,sigmoid",
                       "--seed", 11, "--repeats", 2,
                       "--out-model", model, "--out-report", report) == 0
            outs.append((model.read_bytes(), json.loads(report.read_text())))
        assert outs[0][0] == outs[1][0]  # model file byte-identical
        assert strip_timing(outs[0][1]) == strip_timing(outs[1][1])

    def test_grid_byte_identical(self, tmp_path):
        model = tmp_path / "m.json"
        run("train", "--synth", "moons", "--n", 150, "--arch", "2,4,1",
            "--act", "relu,sigmoid", "--seed", 0, "--out-model", model)
        grids = []
        for tag in ("a", "b"):
            out = tmp_path / f"grid_{tag}.csv"
            assert run("grid", "--model", model, "--xmin", -2, "--xmax", 3,
                       "--ymin", -2, "--ymax", 2, "--resolution", 4,
                       "--out", out) == 0
            grids.append(out.read_bytes())
        assert grids[0] == grids[1]

    def test_grid_row_count_and_sigmoid_variance_bound(self, tmp_path):
        model = tmp_path / "m.json"
        run("train", "--synth", "moons", "--n", 100, "--arch", "2,4,1",
            "--act", "relu,sigmoid", "--seed", 0, "--out-model", model)
        out = tmp_path / "grid.csv"
        assert run("grid", "--model", model, "--xmin", 0, "--xmax", 1,
                   "--ymin", 0, "--ymax", 1, "--resolution", 3,
                   "--out", out) == 0
        rows = list(csv.DictReader(open(out)))
        assert len(rows) == 9
        assert all(float(r["variance"]) <= 0.25 + 1e-9 for r in rows)


class TestBench:
    def test_neurons_sweep(self, tmp_path):
        out_csv = tmp_path / "bench.csv"
        out_json = tmp_path / "bench.json"
        assert run("bench", "--synth", "cubic", "--n", 80,
                   "--sweep", "neurons=3,6", "--epochs", 1, "--repeats", 2,
                   "--seed", 1, "--out-csv", out_csv,
                   "--out-report", out_json) == 0
        rows = list(csv.DictReader(open(out_csv)))
        assert [r["value"] for r in rows] == ["3", "6"]
        assert all(float(r["rmse_std"]) >= 0 for r in rows)
        doc = json.loads(out_json.read_text())
        assert len(doc["cells"][0]["repeats"]) == 2

    def test_layers_sweep(self, tmp_path):
        out_csv = tmp_path / "bench.csv"
        assert run("bench", "--synth", "cubic", "--n", 60,
                   "--sweep", "layers=1,2", "--neurons", 4, "--epochs", 1,
                   "--seed", 1, "--out-csv", out_csv) == 0
        rows = list(csv.DictReader(open(out_csv)))
        assert len(rows) == 2

    def test_epochs_sweep_range_syntax(self, tmp_path):
        out_csv = tmp_path / "bench.csv"
        assert run("bench", "--synth", "cubic", "--n", 60, "--arch", "1,4,1",
                   "--sweep", "epochs=1..3", "--seed", 1,
                   "--out-csv", out_csv) == 0
        rows = list(csv.DictReader(open(out_csv)))
        assert [r["value"] for r in rows] == ["1", "2", "3"]

    def test_parse_int_list(self):
        assert parse_int_list("1,2,5") == [1, 2, 5]
        assert parse_int_list("3..6") == [3, 4, 5, 6]

    def test_unknown_sweep_fails(self, tmp_path):
        assert run("bench", "--synth", "cubic", "--n", 60,
                   "--sweep", "width=1,2") == 1


class TestRotatingMoons:
    def test_steps_and_outputs(self, tmp_path):
        out_dir = tmp_path / "rot"
        assert run("rotating-moons", "--initial-n", 200, "--per-step-n", 30,
                   "--steps", 4, "--arch", "2,6,1", "--act", "relu,sigmoid",
                   "--seed", 2, "--grid-resolution", 3,
                   "--out-dir", out_dir) == 0
        rows = list(csv.DictReader(open(out_dir / "accuracy.csv")))
        assert len(rows) == 5  # step 0 plus 4 adaptation steps
        assert float(rows[0]["degrees"]) == 0.0
        assert float(rows[-1]["degrees"]) == 80.0
        for step in range(1, 5):
            assert (out_dir / f"grid_step_{step:02d}.csv").exists()

    def test_full_scale_adaptation_stays_accurate(self, tmp_path):
        # full protocol, 3 seeds: accuracy on the rotated test split stays
        # >= 0.85 after every adaptation step
        for seed in range(3):
            out_dir = tmp_path / f"rot{seed}"
            assert run("rotating-moons", "--initial-n", 1500,
                       "--per-step-n", 100, "--steps", 18, "--seed", seed,
                       "--out-dir", out_dir) == 0
            rows = list(csv.DictReader(open(out_dir / "accuracy.csv")))
            assert len(rows) == 19
            accs = [float(r["accuracy"]) for r in rows[1:]]
            assert min(accs) >= 0.85, (seed, accs)


class TestWorkerPool:
    def test_parallel_matches_serial(self, tmp_path, monkeypatch):
        reports = {}
        for workers in ("1", "2"):
            monkeypatch.setenv("KBNN_THREADS", workers)
            report = tmp_path / f"r{workers}.json"
            assert run("train", "--synth", "cubic", "--n", 100,
                       "--arch", "1,5,1", "--act", "relu,linear",
                       "--repeats", 3, "--seed", 5,
                       "--out-report", report) == 0
            reports[workers] = strip_timing(json.loads(report.read_text()))
        assert reports["1"] == reports["2"]
