import csv
import json
from pathlib import Path

import numpy as np
import pytest

from weakconv.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, **cfg):
    cfg.setdefault("scene", str(CONFIGS / "disk_cavern.json"))
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_gamma_matches_closed_form(tmp_path):
    out = tmp_path / "g.csv"
    cfg = write_config(tmp_path, operation="gamma", params={"eps": [0.5, 1.0]}, output=str(out))
    assert main(["run", str(cfg)]) == 0
    rows = read_csv(out)
    for r in rows:
        e = float(r["eps"])
        assert float(r["value"]) == pytest.approx(1 - np.sqrt(1 - e * e / 4), abs=1e-3)


def test_empty_grid_gives_header_only(tmp_path):
    out = tmp_path / "e.csv"
    cfg = write_config(tmp_path, operation="gamma", params={"eps": []}, output=str(out))
    assert main(["run", str(cfg)]) == 0
    assert out.read_text() == "eps,value,bound_lower,bound_upper,pass\n"


def test_unknown_operation(tmp_path, capsys):
    cfg = write_config(tmp_path, operation="frobnicate")
    assert main(["run", str(cfg)]) == 2
    assert "unknown operation" in capsys.readouterr().err


def test_parse_error_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"operation": "gamma",\n "params": }')
    assert main(["run", str(path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_unknown_config_field(tmp_path):
    cfg = write_config(tmp_path, operation="gamma", params={"eps": [0.5]}, colour="red")
    assert main(["run", str(cfg)]) == 2


def test_missing_scene_file(tmp_path):
    cfg = write_config(tmp_path, operation="gamma", scene="nowhere.json", params={"eps": [0.5]})
    assert main(["run", str(cfg)]) == 2


def test_bad_seed(tmp_path):
    cfg = write_config(tmp_path, operation="gamma", params={"eps": [0.5]}, seed=-3)
    assert main(["run", str(cfg)]) == 2
    cfg = write_config(tmp_path, operation="gamma", params={"eps": [0.5]}, seed=2 ** 64)
    assert main(["run", str(cfg)]) == 2


def test_flags_override_config(tmp_path, capsys):
    # an invalid tolerance in the config is replaced by the flag
    cfg = write_config(tmp_path, operation="space-delta", params={"eps": [1.0]}, tol=-1.0)
    assert main(["run", str(cfg)]) == 2
    assert main(["run", str(cfg), "--tol", "1e-3"]) == 0


def test_output_dir_flag(tmp_path):
    cfg = write_config(tmp_path, operation="curvature", scene=str(CONFIGS / "ellipse.json"),
                       params={"s": [0.0]})
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    rows = read_csv(tmp_path / "o" / "curvature.csv")
    assert float(rows[0]["value"]) == pytest.approx(0.5, abs=1e-6)


def test_operation_error_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, operation="project", scene=str(CONFIGS / "arc.json"),
                       params={"d": 0.5, "points": [[5.0, 5.0]]})
    assert main(["run", str(cfg)]) == 1
    assert "TubeError" in capsys.readouterr().err


def test_same_seed_same_bytes(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        cfg = write_config(tmp_path, operation="gamma", params={"eps": [0.3, 0.7]}, output=str(out))
        assert main(["run", str(cfg), "--seed", "7"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_verify_single_suite(tmp_path, capsys):
    assert main(["verify", "roots", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "roots" / "t_E_closed_form.csv").exists()
    assert "PASS" in capsys.readouterr().out


def test_verify_unknown_suite():
    assert main(["verify", "nope"]) == 2


def test_list_ops(capsys):
    assert main(["list-ops"]) == 0
    out = capsys.readouterr().out
    assert "gamma" in out and "day-nordlander" in out


def test_usage_error():
    assert main(["dance"]) == 2


@pytest.mark.parametrize("name", ["gamma.json", "cavern_bounds.json", "day_nordlander.json", "project.json",
                                  "curvature.json", "continuity_modulus.json"])
def test_shipped_configs_pass(name, tmp_path):
    assert main(["run", str(CONFIGS / name), "--out", str(tmp_path)]) == 0
