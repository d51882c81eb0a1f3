import json
import os

import pytest

from pwdrecon.cli import config_from_dict, config_to_dict, main
from pwdrecon.core import ModelKind, SplitMode, WaveConfig
from pwdrecon.harness.experiment import ExperimentConfig


def test_config_dict_roundtrip():
    cfg = ExperimentConfig(window_s=1.0, model=ModelKind.RIDGE,
                           split=SplitMode.RANDOM, seed=5,
                           net_channels=(2, 4, 8))
    d = config_to_dict(cfg)
    assert d["model"] == "Ridge" and d["split"] == "Random"
    assert config_from_dict(d) == cfg
    assert config_from_dict(d, seed=9).seed == 9


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh)
    return str(path)


def test_cli_full_pipeline(tmp_path, capsys):
    spec = _write_json(tmp_path / "spec.json",
                       {"n_records": 3, "duration_s": 8.0, "seed": 1})
    ds = str(tmp_path / "ds")
    assert main(["synth", "--spec", spec, "--out", ds]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["records"] == 3

    prep = str(tmp_path / "prep")
    assert main(["preprocess", "--manifest", os.path.join(ds, "records.json"),
                 "--out", prep, "--seed", "0"]) == 0
    assert os.path.exists(os.path.join(prep, "preprocessed.json"))
    capsys.readouterr()

    cfg = _write_json(tmp_path / "cfg.json",
                      {"window_s": 1.0, "epochs": 2,
                       "net_channels": [2, 4, 8], "kernel_size": 3})
    run = str(tmp_path / "run")
    assert main(["train", "--config", cfg, "--data", prep,
                 "--out", run]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert {"mean_r", "rendered_r", "mean_mse"} <= set(summary)
    assert os.path.exists(os.path.join(run, "model.npz"))
    assert os.path.exists(os.path.join(run, "experiment.json"))

    assert main(["evaluate", "--model", os.path.join(run, "model.npz"),
                 "--data", prep]) == 0
    ev = json.loads(capsys.readouterr().out)
    # evaluating the saved checkpoint on the same split reproduces training
    assert ev["mean_r"] == pytest.approx(summary["mean_r"], abs=1e-9)

    abl = str(tmp_path / "abl")
    grid = _write_json(tmp_path / "grid.json",
                       {"base": {"model": "Ridge", "epochs": 1},
                        "grids": ["table2"]})
    assert main(["ablate", "--grid", grid, "--data", prep,
                 "--out", abl]) == 0
    capsys.readouterr()
    assert os.path.exists(os.path.join(abl, "table2.csv"))


def test_cli_error_paths(tmp_path, capsys):
    # missing manifest -> PwdReconError -> exit 2 with JSON on stderr
    rc = main(["preprocess", "--manifest", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "p")])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileMissing"

    # malformed spec file -> exit 1
    bad = tmp_path / "bad.json"
    bad.write_text("{\"n_records\": 0}")
    rc = main(["synth", "--spec", str(bad), "--out", str(tmp_path / "ds")])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValueError"


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])
