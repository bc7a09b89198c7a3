"""End-to-end CLI behaviour, run in process through main(argv)."""

import json

import pytest

from conftest import REF_ROWS
from gossipsim import cli

TWO_TRIANGLES = [
    [0.0, 0.5, 0.5, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.5, 0.0, 0.0, 0.0],
    [0.5, 0.5, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.5, 0.5],
    [0.0, 0.0, 0.0, 0.5, 0.0, 0.5],
    [0.0, 0.0, 0.0, 0.5, 0.5, 0.0],
]


def write_config(tmp_path, name="config.json", **overrides):
    doc = {
        "matrix": {"kind": "explicit", "rows": REF_ROWS},
        "probabilities": {"alpha": 1 / 3, "beta": 1 / 3, "gamma": 1 / 3},
        "schedules": {"T": {"kind": "constant", "value": 0.25},
                      "S": {"kind": "constant", "value": 0.05}},
        "initial": {"kind": "ramp"},
        "steps": 30,
        "trials": 5,
        "seed": 1,
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_experiment_run_directory(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert cli.main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "experiment"
    assert manifest["outputs"] == ["aggregate.csv"]
    assert manifest["finishedAt"] is not None
    assert len(manifest["configHash"]) == 16
    assert manifest["seed"] == 1
    assert manifest["config"]["steps"] == 30

    rows = (out / "aggregate.csv").read_text().splitlines()
    header = rows[0].split(",")
    assert header[:4] == ["k", "meanL", "varL", "ciL"]
    first = dict(zip(header, rows[1].split(",")))
    assert first["k"] == "0"
    assert float(first["meanL"]) == 5.0


def test_experiment_is_reproducible_byte_for_byte(tmp_path):
    cfg = write_config(tmp_path)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["experiment", "--config", str(cfg), "--seed", "42",
                         "--out", str(out)]) == 0
        outs.append((out / "aggregate.csv").read_bytes())
    assert outs[0] == outs[1]


def test_experiment_json_format(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert cli.main(["experiment", "--config", str(cfg), "--format", "json",
                     "--out", str(out)]) == 0
    doc = json.loads((out / "aggregate.json").read_text())
    assert doc["trials"] == 5
    assert doc["rows"][0]["meanL"] == 5.0


def test_experiment_stdout_when_no_out(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["experiment", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("k,meanL,varL")
    assert not (tmp_path / "manifest.json").exists()


def test_manifest_written_before_trials(tmp_path):
    # a config that passes validation but fails during classification leaves
    # a manifest with finishedAt unset
    cfg = write_config(tmp_path, bigM=1.0)
    out = tmp_path / "run"
    assert cli.main(["experiment", "--config", str(cfg), "--out", str(out)]) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["finishedAt"] is None


def test_simulate_stdout_csv(tmp_path, capsys):
    cfg = write_config(tmp_path, trials=2, steps=10)
    assert cli.main(["simulate", "--config", str(cfg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "trial,k,x_1,x_2,x_3,x_4,H,h,spread,L"
    first = lines[1].split(",")
    assert first[:2] == ["0", "0"]
    assert [float(v) for v in first[2:6]] == [1.0, 2.0, 3.0, 4.0]


def test_simulate_json_run_directory(tmp_path):
    cfg = write_config(tmp_path, trials=3, steps=10)
    out = tmp_path / "run"
    assert cli.main(["simulate", "--config", str(cfg), "--format", "json",
                     "--out", str(out)]) == 0
    doc = json.loads((out / "trajectory.json").read_text())
    assert len(doc["trials"]) == 3
    assert doc["trials"][0]["rows"][0]["x"] == [1.0, 2.0, 3.0, 4.0]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["trajectory.json"]


def test_check_stdout_json(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["check", "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) >= {"D0", "lambda2", "lambdaN", "aStar", "conditions"}
    assert len(doc["conditions"]) == 8
    assert doc["D0"] == pytest.approx(0.05 * 1.05 / 3 - 0.0625, abs=1e-15)


def test_check_csv_run_directory(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert cli.main(["check", "--config", str(cfg), "--format", "csv",
                     "--out", str(out)]) == 0
    rows = (out / "theory.csv").read_text().splitlines()
    assert rows[0] == "id,status,claim,caveats"
    assert len(rows) == 9


def test_check_rejects_disconnected_matrix(tmp_path, capsys):
    cfg = write_config(tmp_path, matrix={"kind": "explicit",
                                         "rows": TWO_TRIANGLES})
    assert cli.main(["check", "--config", str(cfg)]) == 2
    assert "weakly connected" in capsys.readouterr().err


def test_set_override_changes_report(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["check", "--config", str(cfg)]) == 0
    d0_base = json.loads(capsys.readouterr().out)["D0"]
    assert cli.main(["check", "--config", str(cfg),
                     "--set", "schedules.S.value=0.2114"]) == 0
    d0_set = json.loads(capsys.readouterr().out)["D0"]
    assert d0_base < 0.0 < d0_set


def test_sweep_run_directory(tmp_path):
    cfg = write_config(tmp_path, trials=4, steps=20)
    out = tmp_path / "run"
    assert cli.main(["sweep", "--config", str(cfg),
                     "--axis", "schedules.S.value", "--values", "0.02,0.2",
                     "--out", str(out)]) == 0
    summary = (out / "sweep.csv").read_text().splitlines()
    assert summary[0].startswith("value,k,meanL")
    assert len(summary) == 3

    for sub in ("schedules.S.value=0.02", "schedules.S.value=0.2"):
        assert (out / sub / "aggregate.csv").exists()
        theory = json.loads((out / sub / "theory.json").read_text())
        assert "conditions" in theory
        assert "D0" in theory
    manifest = json.loads((out / "manifest.json").read_text())
    assert "sweep.csv" in manifest["outputs"]
    assert "schedules.S.value=0.02/theory.json" in manifest["outputs"]


def test_sweep_value_and_axis_errors(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["sweep", "--config", str(cfg),
                     "--axis", "schedules.S.value", "--values", "a,b"]) == 2
    assert cli.main(["sweep", "--config", str(cfg),
                     "--axis", "no.such.path", "--values", "0.1"]) == 2
    capsys.readouterr()


def test_config_error_exit_codes(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["experiment", "--config", str(cfg), "--trials", "0"]) == 2
    assert cli.main(["experiment", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["experiment", "--config", str(bad)]) == 2
    capsys.readouterr()


def test_oracle_passes(capsys):
    assert cli.main(["oracle", "--draws", "5", "--states", "20"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_oracle_with_config(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert cli.main(["oracle", "--config", str(cfg), "--states", "10"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_oracle_rejects_large_or_one_sided_configs(tmp_path, capsys):
    big = write_config(tmp_path, name="big.json",
                       matrix={"kind": "ring", "n": 5})
    assert cli.main(["oracle", "--config", str(big)]) == 2
    asym = write_config(tmp_path, name="asym.json",
                        mode={"variant": "asymmetric", "activeRule": "uniform"})
    assert cli.main(["oracle", "--config", str(asym)]) == 2
    capsys.readouterr()


def test_oracle_detects_mismatch(monkeypatch, capsys):
    monkeypatch.setattr(cli, "one_slot_expectation_enumerated",
                        lambda *a, **kw: 1e9)
    assert cli.main(["oracle", "--draws", "1", "--states", "1"]) == 3
    assert "FAIL" in capsys.readouterr().err
