import csv
import json
from pathlib import Path

import numpy as np
import pytest

from contractsynth import cli
from contractsynth.config import parse_config
from contractsynth.errors import SchemaError
from contractsynth.robot import robot_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg), encoding="utf-8")
    return str(p)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_shipped_config_matches_builtin():
    assert json.loads((CONFIGS / "robot.cfg").read_text()) == robot_config()


def test_analyze_robot(capsys):
    assert cli.main(["analyze", "--config", str(CONFIGS / "robot.cfg"), "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["min_ell"] == 2
    assert cli.main(["analyze", "--config", str(CONFIGS / "robot.cfg")]) == 0
    assert "min_ell = ceil(T / r_c) = 2" in capsys.readouterr().out


def test_analyze_single_piece(tmp_path, capsys):
    assert cli.main(["analyze", "--config", str(CONFIGS / "stable.cfg"), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["min_ell"] == 1


def test_analyze_disjoint_pieces(tmp_path, capsys):
    cfg = robot_config()
    cfg["contract"]["pieces"][1]["states"]["box"]["lower"][0] = 10.0
    cfg["contract"]["pieces"][1]["states"]["box"]["upper"][0] = 11.0
    code = cli.main(["analyze", "--config", write(tmp_path, cfg)])
    assert code == 3
    assert "assumption_violated" in capsys.readouterr().err


def test_schema_errors_identify_field(tmp_path, capsys):
    cfg = robot_config()
    cfg["contract"]["pieces"][2]["inputs"] = {"box": {"lower": [0, 0]}}
    assert cli.main(["analyze", "--config", write(tmp_path, cfg)]) == 2
    assert "contract/pieces/2/inputs" in capsys.readouterr().err

    p = tmp_path / "broken.json"
    p.write_text('{\n  "schema_version": 1,\n  "x0": [1,,2]\n}\n', encoding="utf-8")
    assert cli.main(["analyze", "--config", str(p)]) == 2
    assert "line 3" in capsys.readouterr().err

    cfg = robot_config()
    cfg["x0"] = [1.0, 1.0]
    assert cli.main(["analyze", "--config", write(tmp_path, cfg)]) == 2

    cfg = robot_config()
    cfg["schema_version"] = 99
    with pytest.raises(SchemaError):
        parse_config(cfg)


def test_h_polytope_sets_accepted():
    cfg = robot_config()
    cfg["contract"]["pieces"][0]["inputs"] = {"H": [[1, 0], [-1, 0], [0, 1], [0, -1]], "h": [5, 5, 5, 5]}
    rc = parse_config(cfg)
    assert rc.contract.pieces[0].inputs.contains([4.0, -4.0])
    cfg["contract"]["pieces"][0]["inputs"] = {"H": [[1, 0, 0]], "h": [1]}
    with pytest.raises(SchemaError):
        parse_config(cfg)


def test_synthesize_robot_and_verify(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.main(["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out)]) == 0
    for name in ("discrete_system.json", "discrete_trajectory.csv", "segments.csv", "trajectory.csv",
                 "report.json"):
        assert (out / name).is_file()
    report = json.loads((out / "report.json").read_text())
    assert report["verification"]["implements"] is True
    assert report["tau"] == 1.0 and report["N"] == 5

    header, rows = read_csv(out / "discrete_trajectory.csv")
    assert header == ["k", "t", "F_x", "F_y", "x", "y", "v_x", "v_y"]
    assert len(rows) == 6

    capsys.readouterr()
    assert cli.main(["verify", "--config", str(CONFIGS / "robot.cfg"), "--results", str(out), "--json"]) == 0
    v = json.loads(capsys.readouterr().out)
    assert v["implements"] is True
    assert v["max_state_violation"] == report["verification"]["max_state_violation"]


def test_csv_round_trips_exactly(tmp_path):
    out = tmp_path / "run"
    cli.main(["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out)])
    from contractsynth.robot import INITIAL_STATE, robot_contract, robot_system
    from contractsynth.synthesis import SynthesisProblem, synthesize
    r = synthesize(SynthesisProblem(robot_system(), robot_contract(), INITIAL_STATE, 5, 5))
    _, rows = read_csv(out / "discrete_trajectory.csv")
    u = np.array([[float(v) for v in row[2:4]] for row in rows])
    assert u.tobytes() == r.u_d.tobytes()


def test_tampered_inputs_detected(tmp_path, capsys):
    out = tmp_path / "run"
    cli.main(["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out)])
    path = out / "discrete_trajectory.csv"
    header, rows = read_csv(path)
    rows[2][2] = "40"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows([header] + rows)
    assert cli.main(["verify", "--config", str(CONFIGS / "robot.cfg"), "--results", str(out)]) == 6
    assert "DOES NOT IMPLEMENT" in capsys.readouterr().out


def test_corrupt_and_missing_artifacts(tmp_path, capsys):
    assert cli.main(["verify", "--config", str(CONFIGS / "robot.cfg"), "--results", str(tmp_path / "nope")]) == 7
    empty = tmp_path / "empty"
    empty.mkdir()
    assert cli.main(["verify", "--config", str(CONFIGS / "robot.cfg"), "--results", str(empty)]) == 7
    assert "missing artifact" in capsys.readouterr().err
    out = tmp_path / "run"
    cli.main(["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out)])
    (out / "discrete_trajectory.csv").write_text("k,t\n0,zero\n", encoding="utf-8")
    assert cli.main(["verify", "--config", str(CONFIGS / "robot.cfg"), "--results", str(out)]) == 7


def test_tight_variant_exit_code(tmp_path):
    code = cli.main(["synthesize", "--config", str(CONFIGS / "robot_tight.cfg"), "--out", str(tmp_path)])
    assert code == 5


def test_infeasible_order_exit_code(tmp_path):
    cfg = robot_config()
    cfg["discretization"] = {"ell_d": 5, "N": 1}
    assert cli.main(["synthesize", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 4


def test_stable_feasibility_only(tmp_path):
    code = cli.main(["synthesize", "--config", str(CONFIGS / "stable.cfg"), "--out", str(tmp_path)])
    assert code == 0
    assert json.loads((tmp_path / "discrete_system.json").read_text())["objective_mode"] == "feasibility_only"


def test_auto_search_finds_smallest_order(tmp_path, capsys):
    cfg = robot_config()
    cfg["discretization"] = {"ell_d": 5, "N": "auto"}
    assert cli.main(["synthesize", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["N"] == 5


def test_flag_overrides(tmp_path):
    out = tmp_path / "o"
    args = ["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out),
            "--grid", "31", "--objective", "feasibility_only", "--tolerance", "1e-9"]
    assert cli.main(args) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["verification"]["grid_points_per_segment"] == 31
    assert rep["objective_mode"] == "feasibility_only"


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    assert cli.main(["synthesize", "--config", str(CONFIGS / "stable.cfg")]) == 0
    assert (tmp_path / "envout" / "report.json").is_file()


def test_synthesize_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["synthesize", "--config", str(CONFIGS / "robot.cfg"), "--out", str(out)]) == 0
    for f in a.iterdir():
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_demo(tmp_path, capsys):
    assert cli.main(["demo", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "tau = 1" in out and "IMPLEMENTS" in out
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header[:7] == ["time", "x", "y", "v_x", "v_y", "F_x", "F_y"]
    assert "x_lower" in header and "F_y_upper" in header
    data = np.array([[float(v) for v in r] for r in rows])
    t = data[:, 0]
    F = data[:, 5:7]
    assert np.all(np.abs(F) <= 5.0)
    sel = (t >= 2) & (t <= 3)
    x, y = data[sel, 1], data[sel, 2]
    tol = 1e-9
    assert np.all((x >= 1 - tol) & (x <= 2.5 + tol)) and np.all((y >= -1 - tol) & (y <= 3 + tol))
