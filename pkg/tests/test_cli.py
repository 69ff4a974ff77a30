import csv
import io
import json

import pytest

from bdqms.cli import cmd_verify, main
from bdqms.config import ConfigError, ExperimentConfig, load_config

LIGHT = {"samples": 3, "unitary_orders": [2, 3], "kantorovich": {"restarts": 6, "iterations": 150}}


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_stage_table_values(tmp_path, capsys):
    assert main(["stage-table", "--config", write(tmp_path, {"sigma": [2, 2, 2], "max_stage": 3})]) == 0
    table = rows(capsys.readouterr().out)
    assert [r["m"] for r in table] == ["0", "1", "2", "3"]
    assert float(table[1]["k_m"]) == 1 and float(table[1]["kappa_m"]) == 1
    assert float(table[2]["k_m"]) == pytest.approx(3.6416, abs=1e-4)
    assert float(table[2]["kappa_m"]) == pytest.approx(0.2746, abs=1e-4)
    assert table[3]["tail_bound"] == "1" and table[3]["consecutive_bound"] == "0.5"
    assert table[2]["k_m"] == "3.64159265359"


def test_baire_table(capsys):
    assert main(["baire"]) == 0
    table = rows(capsys.readouterr().out)
    first, second, same = table
    assert first["d_N"] == "0.125" and first["chain_bound"] == "4" and first["ratio"] == "1"
    assert second["d_N"] == "0.5" and second["chain_bound"] == "16"
    assert same["prefix_equal"] == "true" and same["d_N"] == "0"


def test_kantorovich_finite_matches_oracle(capsys):
    assert main(["kantorovich"]) == 0
    table = rows(capsys.readouterr().out)
    for r in table:
        assert abs(float(r["value"]) - float(r["oracle"])) < 1e-9
        if r["phi"] == r["psi"]:
            assert float(r["value"]) == 0
    pair = next(r for r in table if (r["phi"], r["psi"]) == ("delta0", "delta1"))
    assert float(pair["value"]) == 1.0


def test_kantorovich_two_point_json(tmp_path, capsys):
    cfg = write(tmp_path, {"toy": {"kind": "finite", "distances": [[0, 0.7], [0.7, 0]]}})
    assert main(["kantorovich", "--config", cfg, "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    pair = next(r for r in data if (r["phi"], r["psi"]) == ("delta0", "delta1"))
    assert pair["value"] == pytest.approx(0.7, abs=1e-12) and pair["oracle"] == pytest.approx(0.7, abs=1e-12)


def test_kantorovich_stage_rows_within_radius(tmp_path, capsys):
    cfg = write(tmp_path, {"sigma": [2], "max_stage": 1, "toy": {"kind": "stage", "stage": 1}})
    assert main(["kantorovich", "--config", cfg]) == 0
    for r in rows(capsys.readouterr().out):
        assert r["psi"] == "tau" and float(r["value"]) <= 1 + 1e-6


def test_verify_light_config_passes(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--config", write(tmp_path, LIGHT), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and not report["failed"]
    names = [c["name"] for c in report["checks"]]
    assert "unitary_lip/U_2" in names and "threads/S0_formula" in names
    assert report["config"]["samples"] == 3 and report["config"]["kantorovich"]["decay"] == 0.98


def test_verify_uncorrected_bound_fails(tmp_path, capsys):
    code = main(["verify", "--config", write(tmp_path, LIGHT), "--uncorrected-unitary-bound", "--format", "csv"])
    assert code == 1
    failed = [r["name"] for r in rows(capsys.readouterr().out) if r["passed"] == "false"]
    assert "unitary_lip/U_2" in failed and all(n.startswith("unitary_lip/") for n in failed)


def test_verify_is_deterministic(tmp_path):
    cfg = load_config(write(tmp_path, LIGHT), format="json")
    assert cmd_verify(cfg)[1] == cmd_verify(cfg)[1]


@pytest.mark.parametrize("bad", [
    {"sigma": [1, 2]},
    {"max_stage": 5},
    {"unknown": 1},
    {"cutoff": -1},
    {"toy": {"kind": "finite"}},
    {"toy": {"kind": "finite", "distances": [[0, 1], [2, 0]]}},
])
def test_malformed_config_exit_code(tmp_path, capsys, bad):
    assert main(["baire", "--config", write(tmp_path, bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["stage-table", "--config", str(p)]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["stage-table", "--format", "xml"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_overrides():
    cfg = load_config(seed=5, max_stage=1, cutoff=4)
    assert (cfg.seed, cfg.max_stage, cfg.cutoff) == (5, 1, 4)
    assert cfg.kantorovich_params.seed == 5
    with pytest.raises(ConfigError):
        load_config(max_stage=9)
    assert ExperimentConfig.from_dict({}).to_dict()["sigma"] == [2, 3]
