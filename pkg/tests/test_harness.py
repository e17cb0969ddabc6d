import json
import os

import numpy as np
import pytest

from multirc import defaults
from multirc.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from multirc.config import load_config, option, parse_grid
from multirc.errors import ConfigError, DivergenceError
from multirc.harness import run_experiment

TINY = """
[net]
n = 80
p = 0.05
seed = 5

[params]
t_listen = 20
t_train = 60

[task]
b = 5.0
x_cen = {x_cen}

[experiment]
kind = {kind}
rho = {rho}
{extra}

[output]
directory = {out}
"""


def write_config(tmp_path, kind, rho="1.0", x_cen="0.0", extra=""):
    path = tmp_path / f"{kind}.ini"
    out = tmp_path / f"out_{kind}"
    path.write_text(
        TINY.format(kind=kind, rho=rho, x_cen=x_cen, extra=extra, out=out)
    )
    return path, out


def test_defaults_fill_in(tmp_path):
    path = tmp_path / "min.ini"
    path.write_text("[experiment]\nkind = sweep\n")
    config = load_config(path)
    assert config.n == defaults.N_NEURONS
    assert config.p == defaults.CONNECTIVITY
    assert config.tau == defaults.TAU
    assert config.beta == defaults.BETA
    assert config.t_listen == defaults.T_LISTEN
    assert config.t_train == defaults.T_TRAIN
    assert config.b == defaults.ORBIT_RADIUS
    assert config.mode == "opposite"


def test_config_rejections(tmp_path):
    cases = [
        "[experiment]\nkind = dance\n",
        "[experiment]\nkind = sweep\n[net]\nwobble = 3\n",
        "[experiment]\nkind = sweep\n[params]\ngamma = -5\n",
        "[experiment]\nkind = sweep\n[params]\nt_listen = 500\n",
        "[experiment]\nkind = sweep\nrho = -1\n",
        "[experiment]\nkind = sweep\n[task]\nmode = diagonal\n",
        "[experiment]\nkind = sweep\n[net]\nn = oops\n",
        "[task]\nx_cen = 0\n",  # missing experiment section
    ]
    for text in cases:
        path = tmp_path / "bad.ini"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_grid_parsing():
    np.testing.assert_allclose(parse_grid("1.25", "s", "k"), [1.25])
    np.testing.assert_allclose(parse_grid("0.1,0.2,0.4", "s", "k"), [0.1, 0.2, 0.4])
    grid = parse_grid("0.9:1.6:0.05", "s", "k")
    assert len(grid) == 15
    assert grid[0] == pytest.approx(0.9) and grid[-1] == pytest.approx(1.6)
    with pytest.raises(ConfigError):
        parse_grid("1:2", "s", "k")
    with pytest.raises(ConfigError):
        parse_grid("2:1:0.1", "s", "k")


def test_sweep_run_and_echo(tmp_path):
    path, out = write_config(
        tmp_path, "sweep", rho="0.8,1.0", x_cen="0.0,7.0",
        extra="t_predict = 60\nwindow = 20\n",
    )
    manifest = run_experiment(load_config(path))
    csv = out / "sweep.csv"
    lines = csv.read_text().splitlines()
    assert lines[0] == "x_cen,rho,class_A,class_B,delta_rel_max,lambda_A,lambda_B,multifunctional"
    assert len(lines) == 5  # 2x2 grid
    assert (out / "effective_config.ini").exists()
    assert (out / "manifest.json").exists()
    stored = json.loads((out / "manifest.json").read_text())
    assert stored["kind"] == "sweep"
    assert "sweep.csv" in stored["artifacts"]
    assert "numpy" in stored["versions"]
    assert manifest["seed"] == 5


def test_sweep_determinism(tmp_path):
    path, out = write_config(
        tmp_path, "sweep", rho="1.0", x_cen="7.0",
        extra="t_predict = 60\nwindow = 20\n",
    )
    config = load_config(path)
    run_experiment(config, out_dir=str(out / "a"))
    run_experiment(config, out_dir=str(out / "b"))
    first = (out / "a" / "sweep.csv").read_bytes()
    second = (out / "b" / "sweep.csv").read_bytes()
    assert first == second


def test_threaded_sweep_matches_serial(tmp_path):
    path, out = write_config(
        tmp_path, "sweep", rho="0.8,1.0", x_cen="7.0",
        extra="t_predict = 60\nwindow = 20\n",
    )
    config = load_config(path)
    run_experiment(config, out_dir=str(out / "serial"), threads=1)
    run_experiment(config, out_dir=str(out / "pool"), threads=2)
    assert (out / "serial" / "sweep.csv").read_bytes() == (
        out / "pool" / "sweep.csv"
    ).read_bytes()


def test_symmetry_run(tmp_path):
    path, out = write_config(tmp_path, "symmetry", rho="1.0", x_cen="3.0")
    run_experiment(load_config(path))
    lines = (out / "symmetry.csv").read_text().splitlines()
    header = lines[0].split(",")
    values = dict(zip(header, lines[1].split(",")))
    assert float(values["b9_linear_residual"]) < 1e-6
    assert float(values["b9_square_residual"]) < 1e-6
    assert float(values["b2_residual"]) < 1e-4
    assert float(values["mirror_residual"]) < 1e-8


def test_basin_run(tmp_path):
    path, out = write_config(
        tmp_path, "basin", rho="0.4",
        extra="grid_min = -6\ngrid_max = 6\ngrid_points = 3\n"
        "listen_time = 10\nt_predict = 40\nwindow = 20\n",
    )
    run_experiment(load_config(path))
    assert (out / "basin.csv").exists()
    assert (out / "basin_catalog.csv").exists()
    rows = (out / "basin.csv").read_text().splitlines()
    assert len(rows) == 10


def test_track_run(tmp_path):
    path, out = write_config(
        tmp_path, "track", rho="0.8,0.9", x_cen="7.0",
        extra="settle = 20\nwindow = 20\n",
    )
    run_experiment(load_config(path))
    rows = (out / "branch.csv").read_text().splitlines()
    assert rows[0] == "param,period,label,extrema"
    assert 2 <= len(rows) <= 3


def test_itinerancy_run(tmp_path):
    path, out = write_config(
        tmp_path, "itinerancy", rho="1.0", x_cen="7.0",
        extra="span = 100\nwindow = 10\n",
    )
    manifest = run_experiment(load_config(path))
    assert "switch_count" in manifest
    rows = (out / "residence.csv").read_text().splitlines()
    assert rows[0] == "label,duration"
    assert len(rows) >= 2


def test_neuron_run(tmp_path):
    path, out = write_config(
        tmp_path, "neuron", rho="1.0", x_cen="7.0", extra="span = 5\n"
    )
    manifest = run_experiment(load_config(path))
    assert "gap_spread_correlation" in manifest
    rows = (out / "differences.csv").read_text().splitlines()
    assert rows[0].startswith("t,x_gap,bin_0")


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nkind = sweep\n[net]\nn = -3\n")
    assert main(["sweep", "--config", str(bad)]) == EXIT_CONFIG

    good, out = write_config(
        tmp_path, "sweep", rho="1.0", x_cen="7.0",
        extra="t_predict = 60\nwindow = 20\n",
    )
    assert main(["sweep", "--config", str(good)]) == EXIT_OK
    assert (out / "sweep.csv").exists()

    import multirc.cli as cli_module

    def boom(*args, **kwargs):
        raise DivergenceError(17)

    monkeypatch.setattr(cli_module, "run_experiment", boom)
    assert main(["sweep", "--config", str(good)]) == EXIT_NUMERIC
    captured = capsys.readouterr()
    assert "numeric failure" in captured.err


def test_cli_seed_override(tmp_path):
    path, out = write_config(
        tmp_path, "sweep", rho="1.0", x_cen="7.0",
        extra="t_predict = 60\nwindow = 20\n",
    )
    assert main(["sweep", "--config", str(path), "--seed", "9",
                 "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 9
