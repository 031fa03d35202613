import json
import os

import numpy as np
import pytest

from sogran.cli import main
from sogran.tables import cut_size_law, ingest_csv

BASE_CONFIG = {
    "data": {"synthetic": {"object_count": 169, "noise_sigma": 0.0, "seed": 7}},
    "split": {"train_count": 150, "test_count": 19},
    "algorithm": "sonfis",
    "meta": {
        "mode": "random",
        "close_open_iterations": 10,
        "max_rules": 4,
        "neuron_range": [4, 64],
        "seed": 11,
        "som_epochs": 8,
        "nfis_epochs": 5,
    },
    "growth": {"alpha": 1.0, "beta": 10.0, "gamma": 1.0},
    "strength": {"threshold": 0.1, "step": 0.05},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(BASE_CONFIG), encoding="utf-8")
    return str(path)


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestGenerate:
    def test_writes_header_plus_object_rows(self, config_path, tmp_path):
        out = tmp_path / "data.csv"
        assert main(["generate", "--config", config_path, "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 170  # header + 169 objects
        assert lines[0].endswith(",d50")

    def test_reruns_are_byte_identical(self, config_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["generate", "--config", config_path, "--out", str(a)])
        main(["generate", "--config", config_path, "--out", str(b)])
        assert _read_bytes(a) == _read_bytes(b)

    def test_noise_free_decision_recomputable_from_file(self, config_path, tmp_path):
        out = tmp_path / "data.csv"
        main(["generate", "--config", config_path, "--out", str(out)])
        table = ingest_csv(out, "d50")
        np.testing.assert_allclose(table.decisions, cut_size_law(table.conditions), rtol=1e-15)

    def test_seed_flag_changes_the_data(self, config_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["generate", "--config", config_path, "--out", str(a)])
        main(["generate", "--config", config_path, "--out", str(b), "--seed", "8"])
        assert _read_bytes(a) != _read_bytes(b)


SONFIS_FILES = ["run_config.json", "trace.csv", "trace.json", "metrics.json",
                "predictions.csv", "rulebase.json", "membership.csv"]
SORST_FILES = ["run_config.json", "trace.csv", "trace.json", "metrics.json",
               "predictions.csv", "rules.txt", "rules.json"]


class TestRun:
    def test_sonfis_writes_every_artifact(self, config_path, tmp_path):
        out = tmp_path / "run1"
        assert main(["run", "--config", config_path, "--out", str(out)]) == 0
        for name in SONFIS_FILES:
            assert (out / name).is_file(), name
        trace_lines = (out / "trace.csv").read_text().splitlines()
        assert 2 <= len(trace_lines) <= 11  # header + at most 10 iterations
        predictions = (out / "predictions.csv").read_text().splitlines()
        assert len(predictions) == 20  # header + 19 test rows

    def test_sorst_writes_every_artifact_with_strength_column(self, config_path, tmp_path):
        out = tmp_path / "run2"
        code = main(["run", "--config", config_path, "--set", "algorithm=sorst",
                     "--out", str(out)])
        assert code == 0
        for name in SORST_FILES:
            assert (out / name).is_file(), name
        lines = (out / "trace.csv").read_text().splitlines()
        assert len(lines) == 8  # header + 7 selections
        assert "strength_factor" in lines[0]

    def test_reruns_are_byte_identical(self, config_path, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["run", "--config", config_path, "--out", str(out1)])
        main(["run", "--config", config_path, "--out", str(out2)])
        for name in SONFIS_FILES:
            assert _read_bytes(out1 / name) == _read_bytes(out2 / name), name

    def test_seed_override_changes_the_trace(self, config_path, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["run", "--config", config_path, "--out", str(out1)])
        main(["run", "--config", config_path, "--out", str(out2), "--seed", "909"])
        assert _read_bytes(out1 / "trace.csv") != _read_bytes(out2 / "trace.csv")
        cfg = json.loads((out2 / "run_config.json").read_text())
        assert cfg["meta"]["seed"] == 909

    def test_missing_meta_seed_is_rejected(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(BASE_CONFIG))
        del cfg["meta"]["seed"]
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg))
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "r")])
        assert code != 0
        assert "meta.seed" in capsys.readouterr().err

    def test_unknown_algorithm_is_rejected(self, config_path, tmp_path, capsys):
        code = main(["run", "--config", config_path, "--set", "algorithm=magic",
                     "--out", str(tmp_path / "r")])
        assert code != 0
        assert "algorithm" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "r")])
        assert code != 0
        assert "not found" in capsys.readouterr().err

    def test_csv_data_source(self, config_path, tmp_path):
        data = tmp_path / "lab.csv"
        main(["generate", "--config", config_path, "--out", str(data)])
        cfg = json.loads(json.dumps(BASE_CONFIG))
        cfg["data"] = {"csv": str(data), "decision": "d50"}
        path = tmp_path / "c.json"
        path.write_text(json.dumps(cfg))
        out = tmp_path / "r"
        assert main(["run", "--config", str(path), "--out", str(out)]) == 0
        assert (out / "trace.csv").is_file()


class TestReport:
    def _run(self, config_path, tmp_path, algorithm="sonfis"):
        out = tmp_path / f"run_{algorithm}"
        main(["run", "--config", config_path, "--set", f"algorithm={algorithm}",
              "--out", str(out)])
        return out

    def test_sonfis_report_files(self, config_path, tmp_path):
        run_dir = self._run(config_path, tmp_path)
        assert main(["report", str(run_dir)]) == 0
        report = run_dir / "report"
        for name in ("error_vs_iteration.csv", "predicted_vs_actual.csv",
                     "membership_curves.csv"):
            assert (report / name).is_file(), name
        scatter = (report / "predicted_vs_actual.csv").read_text().splitlines()
        assert scatter[0] == "actual,predicted"
        assert len(scatter) == 20  # header + 19 test rows

    def test_sorst_report_files_include_em_grid(self, config_path, tmp_path):
        run_dir = self._run(config_path, tmp_path, "sorst")
        assert main(["report", str(run_dir), "--out", str(tmp_path / "rep")]) == 0
        rep = tmp_path / "rep"
        grid = (rep / "em_grid.csv").read_text().splitlines()
        assert grid[0] == "neurons,reduced_objects,em"
        assert len(grid) == 8
        strength = (rep / "strength_vs_iteration.csv").read_text().splitlines()
        assert strength[0] == "iteration,strength_factor"

    def test_empty_run_directory_lists_missing_artifacts(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        os.makedirs(empty)
        code = main(["report", str(empty)])
        assert code != 0
        err = capsys.readouterr().err
        for name in ("run_config.json", "trace.json", "predictions.csv"):
            assert name in err


class TestSetFlag:
    def test_dotted_set_overrides_nested_values(self, config_path, tmp_path):
        out = tmp_path / "r"
        code = main(["run", "--config", config_path,
                     "--set", "meta.close_open_iterations=3",
                     "--set", "meta.neuron_range=[4,16]",
                     "--out", str(out)])
        assert code == 0
        trace = (out / "trace.csv").read_text().splitlines()
        assert len(trace) == 4  # header + 3 iterations
        neurons = [int(line.split(",")[1]) for line in trace[1:]]
        assert all(4 <= n <= 16 for n in neurons)

    def test_malformed_set_is_rejected(self, config_path, tmp_path, capsys):
        code = main(["run", "--config", config_path, "--set", "justakey",
                     "--out", str(tmp_path / "r")])
        assert code != 0
        assert "--set" in capsys.readouterr().err
