import json
from pathlib import Path

import numpy as np
import pytest

from qconv.cli import ExperimentConfig, main
from qconv.synthdata import write_synthetic_cifar
from qconv.train import RunRecord


@pytest.fixture(scope="module")
def cifar_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synth_cifar.bin"
    write_synthetic_cifar(path, n=40, seed=3)
    return path


def write_config(tmp_path, cifar_file, **overrides) -> Path:
    config = {
        "dataset": "cifar10_small",
        "cifar_path": str(cifar_file),
        "subset_size": 12,
        "resolution": [6, 6],
        "architecture": "hybrid_fig2",
        "ansatz": "fqconv",
        "kernel": [2, 2],
        "circuit_stride": 4,
        "filters": 2,
        "epochs": 2,
        "batch_size": 6,
        "seed": 5,
        "output_dir": str(tmp_path / "run"),
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


class TestTrainCommand:
    def test_smoke_run_writes_artifacts(self, tmp_path, cifar_file):
        config = write_config(tmp_path, cifar_file)
        assert main(["train", str(config)]) == 0
        out = tmp_path / "run"
        assert (out / "run.csv").exists()
        assert (out / "checkpoint.bin").exists()
        resolved = json.loads((out / "config_resolved.json").read_text())
        assert resolved["learning_rate"] == 0.01  # default made explicit
        assert resolved["seed"] == 5
        record = RunRecord.from_csv(out / "run.csv")
        assert len(record.entries) == 2

    def test_rerun_is_identical(self, tmp_path, cifar_file):
        # every trained number reproduces exactly; wall_time_s is the one
        # column that legitimately differs between reruns
        def trained_columns(path):
            rows = path.read_text().strip().splitlines()
            return [row.rsplit(",", 1)[0] for row in rows]

        config = write_config(tmp_path, cifar_file)
        assert main(["train", str(config)]) == 0
        first = trained_columns(tmp_path / "run" / "run.csv")
        assert main(["train", str(config)]) == 0
        assert trained_columns(tmp_path / "run" / "run.csv") == first

    def test_invalid_stride_rejected(self, tmp_path, cifar_file, capsys):
        config = write_config(tmp_path, cifar_file, ansatz="hqconv",
                              circuit_stride=4)
        assert main(["train", str(config)]) == 2
        err = capsys.readouterr().err
        assert "stride" in err and "smaller" in err

    def test_missing_dataset_file(self, tmp_path, cifar_file, capsys):
        config = write_config(tmp_path, cifar_file,
                              cifar_path=str(tmp_path / "nope.bin"))
        assert main(["train", str(config)]) == 2
        assert "nope.bin" in capsys.readouterr().err

    def test_unknown_field_rejected(self, tmp_path, cifar_file, capsys):
        config = write_config(tmp_path, cifar_file, cheese="brie")
        assert main(["train", str(config)]) == 2
        assert "cheese" in capsys.readouterr().err

    def test_bad_json_diagnostics(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"dataset": }')
        assert main(["train", str(path)]) == 2
        assert "broken.json:1" in capsys.readouterr().err


class TestEvalCommand:
    def test_eval_after_train(self, tmp_path, cifar_file):
        config = write_config(tmp_path, cifar_file)
        assert main(["train", str(config)]) == 0
        out = tmp_path / "run"
        assert main(["eval", str(out / "checkpoint.bin"), str(config)]) == 0
        accuracy = float((out / "eval.csv").read_text().splitlines()[1])
        record = RunRecord.from_csv(out / "run.csv")
        confusion = np.loadtxt(out / "confusion.csv", delimiter=",",
                               dtype=np.int64)
        assert confusion.shape == (10, 10)
        assert confusion.sum() == 12
        assert np.trace(confusion) == pytest.approx(accuracy * 12)

    def test_corrupted_checkpoint(self, tmp_path, cifar_file, capsys):
        config = write_config(tmp_path, cifar_file)
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"QCNVgarbage")
        assert main(["eval", str(bad), str(config)]) == 2
        assert "truncated" in capsys.readouterr().err

    def test_incompatible_checkpoint(self, tmp_path, cifar_file, capsys):
        config = write_config(tmp_path, cifar_file)
        assert main(["train", str(config)]) == 0
        other = write_config(tmp_path, cifar_file, filters=3)
        ckpt = tmp_path / "run" / "checkpoint.bin"
        assert main(["eval", str(ckpt), str(other)]) == 2
        assert "shape" in capsys.readouterr().err


class TestReportCommand:
    def _fake_run(self, tmp_path, name, loss, accuracy):
        d = tmp_path / name
        d.mkdir()
        lines = ["epoch,train_loss,train_accuracy,eval_accuracy,wall_time_s"]
        for i, (l, a) in enumerate(zip(loss, accuracy), start=1):
            lines.append(f"{i},{l},{a},,0.0")
        (d / "run.csv").write_text("\n".join(lines) + "\n")
        return d

    def test_two_runs_give_four_rows(self, tmp_path):
        t = np.arange(30)
        a = self._fake_run(tmp_path, "a", 2 - t / 30, t / 60)
        b = self._fake_run(tmp_path, "b", np.exp(-t / 9), t / 40)
        out = tmp_path / "smoothness.csv"
        assert main(["report", str(a), str(b), "--out", str(out)]) == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "curve,window,polyorder,avg_l1,std_dev"
        assert len(rows) == 5
        names = [r.split(",")[0] for r in rows[1:]]
        assert names == ["a_loss", "a_accuracy", "b_loss", "b_accuracy"]

    def test_constant_run_scores_zero(self, tmp_path):
        d = self._fake_run(tmp_path, "const", [1.5] * 20, [0.5] * 20)
        out = tmp_path / "s.csv"
        assert main(["report", str(d), "--out", str(out)]) == 0
        for row in out.read_text().strip().splitlines()[1:]:
            _, _, _, avg_l1, std = row.split(",")
            assert float(avg_l1) == 0.0 and float(std) == 0.0

    def test_deterministic(self, tmp_path):
        t = np.arange(25)
        d = self._fake_run(tmp_path, "r", np.exp(-t / 7), t / 50)
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        assert main(["report", str(d), "--out", str(out1)]) == 0
        assert main(["report", str(d), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_run_csv(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["report", str(empty)]) == 2
        assert "run.csv" in capsys.readouterr().err


def test_config_defaults_round_trip(tmp_path, cifar_file):
    config = ExperimentConfig.from_file(write_config(tmp_path, cifar_file))
    assert config.kernel == [2, 2]
    assert config.optimizer == "adam"
    assert config.channels == 3
