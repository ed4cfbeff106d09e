import json

import numpy as np
import pytest

from llp.cli import main
from llp.data import load_bag_csv, load_dataset_csv

TINY_CONFIG = {
    "dataset": {"generator": "xor"},
    "bag_config": "A",
    "n_train": 20,
    "repeats": 2,
    "gamma_grid": [0.5, 2.0],
    "seed": 11,
}


def write_config(tmp_path, overrides=None):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({**TINY_CONFIG, **(overrides or {})}))
    return path


class TestGenerate:
    def test_writes_dataset_and_bags(self, tmp_path, capsys):
        out = tmp_path / "data"
        code = main(
            [
                "generate",
                "--dataset",
                "xor",
                "--n",
                "20",
                "--seed",
                "3",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        dataset = load_dataset_csv(out / "dataset.csv", label_column="label")
        assignment = load_bag_csv(out / "bags.csv")
        assert dataset.n == 24  # train plus the 20% test bag
        assert assignment.shape == (24,)
        assert set(np.unique(assignment)) == {0, 1, 2, 3}
        assert "test bag" in capsys.readouterr().out

    def test_deterministic(self, tmp_path):
        for sub in ("a", "b"):
            main(
                [
                    "generate",
                    "--dataset",
                    "half_kernel",
                    "--n",
                    "20",
                    "--seed",
                    "5",
                    "--out",
                    str(tmp_path / sub),
                ]
            )
        assert (tmp_path / "a/dataset.csv").read_text() == (
            tmp_path / "b/dataset.csv"
        ).read_text()
        assert (tmp_path / "a/bags.csv").read_text() == (
            tmp_path / "b/bags.csv"
        ).read_text()

    def test_custom_proportions(self, tmp_path):
        code = main(
            [
                "generate",
                "--dataset",
                "xor",
                "--n",
                "20",
                "--seed",
                "1",
                "--out",
                str(tmp_path / "c"),
                "--bag-config",
                "0.7,0.3",
            ]
        )
        assert code == 0
        assignment = load_bag_csv(tmp_path / "c/bags.csv")
        assert set(np.unique(assignment)) == {0, 1, 2}


class TestRun:
    def test_writes_results(self, tmp_path, capsys):
        config = write_config(tmp_path)
        out = tmp_path / "results"
        code = main(["run", "--config", str(config), "--out", str(out)])
        assert code == 0
        assert (out / "results.csv").exists()
        payload = json.loads((out / "results.json").read_text())
        assert payload[0]["name"] == "xor-20A"
        assert payload[0]["completed"] == 2
        assert "xor-20A" in capsys.readouterr().out

    def test_trace_flag_adds_trace_file(self, tmp_path):
        config = write_config(tmp_path)
        out = tmp_path / "results"
        code = main(["run", "--config", str(config), "--out", str(out), "--trace"])
        assert code == 0
        trace = json.loads((out / "trace.json").read_text())
        per_repeat = trace["xor-20A"]
        assert len(per_repeat) == 2
        assert len(per_repeat[0]["residual_trace"]) >= 1
        assert len(per_repeat[0]["objective_trace"]) >= 1

    def test_unknown_config_key_fails_cleanly(self, tmp_path, capsys):
        config = tmp_path / "exp.json"
        config.write_text(json.dumps({**TINY_CONFIG, "bogus": 1}))
        code = main(["run", "--config", str(config), "--out", str(tmp_path / "r")])
        assert code == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = main(
            ["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
        )
        assert code == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        config = tmp_path / "exp.json"
        config.write_text("{not json")
        code = main(["run", "--config", str(config), "--out", str(tmp_path / "r")])
        assert code == 2
        assert "JSON" in capsys.readouterr().err


class TestSweep:
    def test_runs_each_format(self, tmp_path, capsys):
        config = write_config(tmp_path)
        out = tmp_path / "sweep"
        code = main(
            [
                "sweep",
                "--config",
                str(config),
                "--out",
                str(out),
                "--formats",
                "20A,20B",
            ]
        )
        assert code == 0
        lines = (out / "results.csv").read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("20A,")
        assert lines[2].startswith("20B,")
        payload = json.loads((out / "results.json").read_text())
        assert [p["name"] for p in payload] == ["20A", "20B"]

    def test_bad_format_code(self, tmp_path, capsys):
        config = write_config(tmp_path)
        code = main(
            [
                "sweep",
                "--config",
                str(config),
                "--out",
                str(tmp_path / "s"),
                "--formats",
                "60Z9",
            ]
        )
        assert code == 2
        assert "format code" in capsys.readouterr().err


class TestParser:
    def test_requires_subcommand(self):
        with pytest.raises(SystemExit):
            main([])

    def test_generate_requires_dataset(self):
        with pytest.raises(SystemExit):
            main(["generate", "--n", "20", "--out", "x"])
