"""Command line interface: config validation, reports, exit codes."""

import json

from chainwaves import cli
from chainwaves.cli import load_config, parse_config
from chainwaves.linearized import LinearizedOperator


def base_config(tmp_path, **overrides):
    data = {
        "model": {"alpha": [1.0], "beta": [1.0], "psi": {"family": "none"}},
        "grid": {"num_points": 512},
        "solver": {"epsilon": 0.2},
        "output": {"path": str(tmp_path / "out.csv"), "format": "csv"},
    }
    data.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path, data


def test_solve_minimal_config(tmp_path):
    path, data = base_config(tmp_path, solver={"epsilon": 0.1})
    assert cli.main(["solve", "--config", str(path), "--quiet"]) == 0
    lines = (tmp_path / "out.csv").read_text().splitlines()
    header_at = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    assert lines[header_at] == "x,W0,W_eps,V_eps"
    assert len(lines) - header_at - 1 == 512  # one row per node
    assert any("tw_residual" in line for line in lines[:header_at])
    # byte-stable across repeated runs
    first = (tmp_path / "out.csv").read_bytes()
    assert cli.main(["solve", "--config", str(path), "--quiet"]) == 0
    assert (tmp_path / "out.csv").read_bytes() == first


def test_solver_failure_exits_3(tmp_path, capsys):
    path, _ = base_config(tmp_path, solver={"epsilon": 0.2, "max_iter": 1})
    assert cli.main(["solve", "--config", str(path)]) == 3
    assert "NoConvergence" in capsys.readouterr().err


def test_solve_json_format(tmp_path):
    path, _ = base_config(tmp_path)
    out = tmp_path / "out.json"
    code = cli.main(
        ["solve", "--config", str(path), "--output", str(out), "--format", "json", "--quiet"]
    )
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"diagnostics", "profile"}
    assert len(payload["profile"]["W_eps"]) == 512


def test_negative_alpha_exits_2(tmp_path, capsys):
    path, _ = base_config(tmp_path, model={"alpha": [-1.0], "beta": [1.0]})
    assert cli.main(["solve", "--config", str(path)]) == 2
    assert "positive" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path):
    path, data = base_config(tmp_path)
    data["extra"] = 1
    path.write_text(json.dumps(data))
    assert cli.main(["solve", "--config", str(path)]) == 2


def test_unwritable_output_exits_4(tmp_path):
    path, _ = base_config(tmp_path, output={"path": str(tmp_path / "no" / "dir" / "x.csv")})
    assert cli.main(["solve", "--config", str(path)]) == 4


def test_missing_output_exits_2(tmp_path):
    path, data = base_config(tmp_path)
    del data["output"]
    path.write_text(json.dumps(data))
    assert cli.main(["solve", "--config", str(path)]) == 2


def test_sweep_orders_and_determinism(tmp_path):
    path, _ = base_config(
        tmp_path, solver={"epsilon_list": [0.4, 0.2, 0.1], "tol": 1e-12}
    )
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli.main(["sweep", "--config", str(path), "--output", str(out1), "--quiet"]) == 0
    assert cli.main(["sweep", "--config", str(path), "--output", str(out2), "--quiet"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == (
        "epsilon,l2_error,sup_error,order_l2,order_sup,iterations,"
        "tw_residual,sigma_min,residual_norm_RS,tail_rate"
    )
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[3] == "" and first[4] == ""  # no orders on the first row
    for line in lines[2:]:
        cells = line.split(",")
        assert 1.7 <= float(cells[3]) <= 2.3
        assert 1.7 <= float(cells[4]) <= 2.3


def test_sweep_single_entry_exits_2(tmp_path):
    path, _ = base_config(tmp_path, solver={"epsilon_list": [0.2]})
    assert cli.main(["sweep", "--config", str(path)]) == 2


def test_sweep_increasing_exits_2(tmp_path):
    path, _ = base_config(tmp_path, solver={"epsilon_list": [0.1, 0.2]})
    assert cli.main(["sweep", "--config", str(path)]) == 2


def test_sweep_partial_failure_marks_row(tmp_path, monkeypatch, capsys):
    # a near-singular linearization marks its row but the sweep continues
    monkeypatch.setattr(
        LinearizedOperator, "smallest_singular_value", lambda self: 1e-9
    )
    path, _ = base_config(tmp_path, solver={"epsilon_list": [0.2, 0.1]})
    assert cli.main(["sweep", "--config", str(path)]) == 0
    err = capsys.readouterr().err
    assert "NearSingular" in err
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[1].split(",")[1] == "error:NearSingular"


def test_simulate_defaults(tmp_path):
    path, _ = base_config(
        tmp_path,
        grid={"num_points": 1024},
        sim={"particles": 80, "dt": 0.02, "horizon": 4.9},
        output={"path": str(tmp_path / "sim.json"), "format": "json"},
    )
    assert cli.main(["simulate", "--config", str(path), "--quiet"]) == 0
    payload = json.loads((tmp_path / "sim.json").read_text())
    assert payload["transport_error"] <= 0.02
    assert payload["energy_drift"] <= 1e-6
    assert payload["momentum_drift"] <= 1e-12


def test_simulate_window_overflow_exits_5(tmp_path):
    path, _ = base_config(
        tmp_path,
        grid={"num_points": 1024},
        sim={"particles": 80, "dt": 0.02, "horizon": 500.0},
    )
    assert cli.main(["simulate", "--config", str(path)]) == 5


def test_simulate_dt_guard_exits_2(tmp_path):
    path, _ = base_config(
        tmp_path, sim={"particles": 80, "dt": 0.5, "horizon": 1.0}
    )
    assert cli.main(["simulate", "--config", str(path)]) == 2


def test_simulate_requires_sim_block(tmp_path):
    path, _ = base_config(tmp_path)
    assert cli.main(["simulate", "--config", str(path)]) == 2


def test_epsilon_override(tmp_path):
    path, _ = base_config(tmp_path, solver={"epsilon": 0.2})
    out = tmp_path / "o.json"
    code = cli.main(
        [
            "solve",
            "--config",
            str(path),
            "--epsilon",
            "0.1",
            "--output",
            str(out),
            "--format",
            "json",
            "--quiet",
        ]
    )
    assert code == 0
    assert json.loads(out.read_text())["diagnostics"]["epsilon"] == 0.1


def test_config_roundtrip_idempotent(tmp_path):
    path, _ = base_config(
        tmp_path,
        model={"alpha": [1.0, 1.0], "beta": [1.0, 1.0], "psi": {"family": "cubic", "params": [0.1, 0.1]}},
        sim={"particles": 60, "dt": 0.01, "horizon": 2.0},
    )
    config = load_config(str(path))
    once = config.to_dict()
    twice = parse_config(once).to_dict()
    assert once == twice


def test_invalid_json_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["solve", "--config", str(path)]) == 2


def test_missing_config_exits_2(tmp_path):
    assert cli.main(["solve", "--config", str(tmp_path / "nope.json")]) == 2


def test_verify_command_passes(tmp_path, capsys):
    path, _ = base_config(tmp_path, grid={"num_points": 1024})
    assert cli.main(["verify", "--config", str(path), "--quiet"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 20
    assert "[FAIL]" not in out


def test_verify_coarse_grid_fails_order_checks(tmp_path, capsys):
    path, _ = base_config(tmp_path, grid={"num_points": 32})
    assert cli.main(["verify", "--config", str(path)]) == 1
    captured = capsys.readouterr()
    assert "averaging_asymptotic_orders" in captured.err
    assert "[FAIL]" in captured.out
