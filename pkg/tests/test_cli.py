import csv
import json

import pytest

from samlab import cli


def write_config(tmp_path, **overrides):
    cfg = {
        "dataset": {"generator": "two_moons", "n": 120, "noise_sd": 0.2,
                    "seed": 5, "train_fraction": 0.5},
        "label_noise_fraction": 0.1,
        "model": {"kind": "mlp", "hidden": [6]},
        "optimizer": {"kind": "sgd", "learning_rate": 0.1, "momentum": 0.9},
        "optimizers": [
            {"kind": "sgd", "learning_rate": 0.1, "momentum": 0.9},
            {"kind": "sam", "learning_rate": 0.1, "momentum": 0.9, "rho": 0.05},
        ],
        "epochs": 2,
        "batch_size": 20,
        "seeds": [1, 2],
        "probe": {"rho": 0.05, "restarts": 2, "inner_steps": 4, "n_samples": 8},
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def test_train_writes_outputs(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    code = cli.main(["train", "--config", str(config), "--out", str(out)])
    assert code == 0
    assert (out / "runs.csv").exists()
    assert (out / "summary.csv").exists()
    assert (out / "summary.json").exists()
    with open(out / "runs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["seed"] for r in rows] == ["1", "2"]
    assert all(r["optimizer"] == "sgd" for r in rows)


def test_seeds_flag_overrides_config(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    code = cli.main(["train", "--config", str(config), "--out", str(out),
                     "--seeds", "11,12,13"])
    assert code == 0
    with open(out / "runs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["seed"] for r in rows] == ["11", "12", "13"]


def test_compare_emits_one_summary_row_per_optimizer(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    code = cli.main(["compare", "--config", str(config), "--out", str(out)])
    assert code == 0
    with open(out / "summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["optimizer"] for r in rows] == ["sgd", "sam"]
    with open(out / "runs.csv") as fh:
        runs = list(csv.DictReader(fh))
    assert len(runs) == 4


def test_unknown_config_key_exits_2(tmp_path, capsys):
    config = write_config(tmp_path, typo_key=1)
    code = cli.main(["train", "--config", str(config), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "typo_key" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path, capsys):
    code = cli.main(["train", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "o")])
    assert code == 2


def test_train_without_out_dir_exits_2(tmp_path, capsys):
    config = write_config(tmp_path)
    code = cli.main(["train", "--config", str(config)])
    assert code == 2
    assert "output directory" in capsys.readouterr().err


def test_compare_requires_optimizers_list(tmp_path, capsys):
    cfg_path = tmp_path / "config.json"
    raw = json.loads(write_config(tmp_path).read_text())
    del raw["optimizers"]
    cfg_path.write_text(json.dumps(raw))
    code = cli.main(["compare", "--config", str(cfg_path),
                     "--out", str(tmp_path / "o")])
    assert code == 2


def test_probe_prints_report_json(tmp_path, capsys):
    config = write_config(tmp_path)
    out = tmp_path / "out"
    cli.main(["train", "--config", str(config), "--out", str(out), "--seeds", "1"])
    capsys.readouterr()
    ckpt = out / "checkpoints" / "sgd_seed1.ckpt"
    code = cli.main(["probe", "--config", str(config), "--checkpoint", str(ckpt)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert "l_max_estimate" in report
    assert report["data_scope"] == "train"


def test_slice_writes_grid(tmp_path):
    config = write_config(tmp_path, slice={"name": "around", "extent": 0.5,
                                           "n_points": 5})
    out = tmp_path / "out"
    cli.main(["train", "--config", str(config), "--out", str(out), "--seeds", "1"])
    ckpt = out / "checkpoints" / "sgd_seed1.ckpt"
    code = cli.main(["slice", "--config", str(config), "--checkpoint", str(ckpt),
                     "--out", str(out)])
    assert code == 0
    lines = (out / "slice_around.csv").read_text().splitlines()
    assert lines[0] == "alpha,beta,loss"
    assert len(lines) == 26


def test_cli_invocations_are_deterministic(tmp_path):
    config = write_config(tmp_path)
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert cli.main(["train", "--config", str(config), "--out", str(out1)]) == 0
    assert cli.main(["train", "--config", str(config), "--out", str(out2)]) == 0
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()

    def rows_sans_timing(path):
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            row.pop("wall_seconds")
        return rows

    assert rows_sans_timing(out1 / "runs.csv") == rows_sans_timing(out2 / "runs.csv")
