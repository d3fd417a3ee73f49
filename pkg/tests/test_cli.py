import csv
import json

import pytest

from prockt.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    EXIT_VALIDATION,
    main,
    read_config_file,
    subseed,
)

SIM = """
num_students = 12
num_problems = 10
num_concepts = 3
steps_per_student = 8
"""

TRAIN_FLAGS = ["--embed-dim", "8", "--max-len", "8", "--batch-size", "8",
               "--epochs", "2", "--patience", "2", "--lr", "5e-3"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """One synth -> extract-mp -> train chain shared by the read-only tests."""
    root = tmp_path_factory.mktemp("cli")
    (root / "sim.cfg").write_text(SIM)
    assert main(["synth", "--config", str(root / "sim.cfg"),
                 "--out", str(root / "data")]) == EXIT_OK
    assert main(["extract-mp", "--data", str(root / "data"),
                 "--out", str(root / "annotated"),
                 "--cache", str(root / "cache"), "--client", "mock"]) == EXIT_OK
    assert main(["train", "--data", str(root / "annotated"),
                 "--out", str(root / "run")] + TRAIN_FLAGS) == EXIT_OK
    return root


class TestHelpers:
    def test_read_config_file(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("a = 1\n# comment\n\nb = two # trailing\n")
        assert read_config_file(path) == {"a": "1", "b": "two"}

    def test_read_config_file_rejects_bad_line(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just words\n")
        with pytest.raises(Exception, match="key = value"):
            read_config_file(path)

    def test_subseed_is_stable_and_name_sensitive(self):
        assert subseed(42, "split") == subseed(42, "split")
        assert subseed(42, "split") != subseed(42, "init")
        assert subseed(42, "split") != subseed(43, "split")


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == EXIT_USAGE

    def test_missing_required_argument(self, capsys):
        assert main(["train", "--out", "x"]) == EXIT_USAGE

    def test_missing_data_directory(self, tmp_path, capsys):
        assert main(["train", "--data", str(tmp_path / "nope"),
                     "--out", str(tmp_path / "run")]) == EXIT_USAGE

    def test_unknown_simulator_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("numb_students = 5\n")
        assert main(["synth", "--config", str(cfg),
                     "--out", str(tmp_path / "d")]) == EXIT_USAGE

    def test_too_few_students_is_a_validation_error(self, tmp_path, capsys):
        cfg = tmp_path / "tiny.cfg"
        cfg.write_text("num_students = 2\nnum_problems = 5\n"
                       "num_concepts = 2\nsteps_per_student = 6\n")
        assert main(["synth", "--config", str(cfg),
                     "--out", str(tmp_path / "d")]) == EXIT_OK
        assert main(["train", "--data", str(tmp_path / "d"),
                     "--out", str(tmp_path / "run")] + TRAIN_FLAGS) == EXIT_VALIDATION

    def test_corrupt_dataset_is_a_validation_error(self, workspace, tmp_path, capsys):
        data = tmp_path / "data"
        data.mkdir()
        (data / "problems.json").write_text(
            (workspace / "data" / "problems.json").read_text())
        lines = (workspace / "data" / "interactions.jsonl").read_text().splitlines()
        doc = json.loads(lines[0])
        doc["correct"] = 7
        (data / "interactions.jsonl").write_text(json.dumps(doc) + "\n")
        assert main(["train", "--data", str(data),
                     "--out", str(tmp_path / "run")] + TRAIN_FLAGS) == EXIT_VALIDATION


class TestSynth:
    def test_outputs_and_manifest(self, workspace):
        data = workspace / "data"
        assert (data / "problems.json").exists()
        assert (data / "interactions.jsonl").exists()
        manifest = json.loads((data / "manifest.json").read_text())
        assert manifest["command"] == "synth"
        assert manifest["config"]["num_students"] == 12
        assert str(workspace / "sim.cfg") in manifest["input_hashes"]

    def test_deterministic(self, workspace, tmp_path, capsys):
        assert main(["synth", "--config", str(workspace / "sim.cfg"),
                     "--out", str(tmp_path / "again")]) == EXIT_OK
        assert (tmp_path / "again" / "interactions.jsonl").read_text() == \
               (workspace / "data" / "interactions.jsonl").read_text()


class TestExtractMP:
    def test_all_records_annotated(self, workspace):
        report = json.loads((workspace / "annotated" / "pipeline_report.json").read_text())
        assert report["annotated"] == 96 and report["failed"] == 0
        for line in (workspace / "annotated" / "interactions.jsonl").read_text().splitlines():
            assert json.loads(line).get("mp") is not None

    def test_warm_cache_rerun(self, workspace, tmp_path, capsys):
        assert main(["extract-mp", "--data", str(workspace / "data"),
                     "--out", str(tmp_path / "annotated2"),
                     "--cache", str(workspace / "cache"), "--client", "mock"]) == EXIT_OK
        report = json.loads((tmp_path / "annotated2" / "pipeline_report.json").read_text())
        assert report["cached"] == 96


class TestTrainEvalReport:
    def test_train_artifacts(self, workspace):
        run = workspace / "run"
        metrics = json.loads((run / "metrics.json").read_text())
        assert set(metrics) == {"variant", "backbone", "lr", "dropout", "alpha",
                                "val_auc", "val_acc", "test_auc", "test_acc",
                                "epochs_trained"}
        assert 0.0 <= metrics["test_auc"] <= 1.0
        ckpt = json.loads((run / "checkpoint.json").read_text())
        assert "model_config" in ckpt["meta"] and "vocab" in ckpt["meta"]
        with open(run / "history.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["epoch", "train_loss", "val_auc", "val_acc"]
        assert len(rows) - 1 == metrics["epochs_trained"]
        assert (run / "manifest.json").exists()

    def test_train_is_deterministic(self, workspace, tmp_path, capsys):
        assert main(["train", "--data", str(workspace / "annotated"),
                     "--out", str(tmp_path / "run2")] + TRAIN_FLAGS) == EXIT_OK
        again = json.loads((tmp_path / "run2" / "metrics.json").read_text())
        first = json.loads((workspace / "run" / "metrics.json").read_text())
        assert again == first

    def test_eval_checkpoint(self, workspace, tmp_path, capsys):
        out = tmp_path / "eval.json"
        assert main(["eval", "--checkpoint", str(workspace / "run" / "checkpoint.json"),
                     "--data", str(workspace / "annotated"),
                     "--out", str(out)]) == EXIT_OK
        doc = json.loads(out.read_text())
        assert {"auc", "acc", "n_predictions"} <= set(doc)
        assert doc["n_predictions"] > 0

    def test_report_table(self, workspace, tmp_path, capsys):
        out = tmp_path / "report.md"
        assert main(["report", "--runs", str(workspace / "run"),
                     "--out", str(out)]) == EXIT_OK
        table = out.read_text()
        assert "| Backbone |" in table
        assert "| recurrent |" in table


class TestGradcheck:
    def test_passes_with_exit_zero(self, capsys):
        assert main(["gradcheck", "--seeds", "2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "composite loss" in out
        assert "FAIL" not in out
