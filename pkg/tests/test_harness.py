import math

import numpy as np
import pytest

from expmhd import cli, harness
from expmhd.harness import (ConfigError, ExperimentConfig,
                            ReferenceDisagreement, error_norm, integrate_rk4,
                            parse_config, read_records_csv,
                            reference_solution, run_experiment)
from expmhd.mhd import Grid2D
from expmhd.snapshot import read_snapshot

SMALL = """
problem = reconnection
nx = 16
ny = 8
mu = 5e-2
eta = 5e-3
kappa = 4e-2
method = epirk5p1
tolerances = 1e-2,1e-5
t_final = 0.4
"""


def write_cfg(tmp_path, text=SMALL, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ------------------------------------------------------------ config file

def test_parse_config_round_trip(tmp_path):
    cfg = parse_config(write_cfg(tmp_path))
    assert cfg.problem == "reconnection"
    assert (cfg.nx, cfg.ny) == (16, 8)
    assert cfg.tolerances == (1e-2, 1e-5)
    assert cfg.t_final == 0.4
    assert cfg.controls == (1e-2, 1e-5)


def test_parse_config_comments_and_spacing(tmp_path):
    text = "problem=kh\nmethod = epirk4-fixed # inline comment\n" \
           "step_sizes = 0.1, 0.05\nt_final=1.0\n\n# full comment\n"
    cfg = parse_config(write_cfg(tmp_path, text))
    assert cfg.method == "epirk4-fixed"
    assert cfg.step_sizes == (0.1, 0.05)


@pytest.mark.parametrize("text,phrase", [
    ("problem = vortex\ntolerances=1e-3\n", "unknown problem"),
    ("method = bdf2\ntolerances=1e-3\n", "unknown method"),
    ("tolerances = 1e-3\nt_final = -1\n", "t_final"),
    ("method = epirk5p1\nt_final = 1\n", "tolerance list"),
    ("method = epirk4-fixed\ntolerances=1e-3\nt_final=1\n", "step-size"),
    ("bogus_key = 1\n", "unknown key"),
    ("just a line\n", "key=value"),
    ("nx = three\n", "bad value"),
])
def test_parse_config_errors(tmp_path, text, phrase):
    with pytest.raises(ConfigError, match=phrase):
        parse_config(write_cfg(tmp_path, text))


def test_parse_config_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config("/nonexistent/path.cfg")


def test_resolved_items_expand_defaults():
    cfg = ExperimentConfig(tolerances=(1e-3,))
    items = dict(cfg.resolved_items())
    assert items["gamma"] == pytest.approx(5.0 / 3.0)
    assert items["reference_tol"] == 1e-11
    assert items["seed"] == 0


# ------------------------------------------------------------- error norm

def test_error_norm_zero_for_identical():
    g = Grid2D(8, 8, 0.0, 1.0, 0.0, 1.0)
    U = np.random.default_rng(0).standard_normal((8, 8, 8))
    assert error_norm(U, U, g) == 0.0


def test_error_norm_single_cell_closed_form():
    g = Grid2D(10, 5, 0.0, 2.0, 0.0, 1.0)
    U = np.zeros((8, 10, 5))
    V = U.copy()
    delta = 0.37
    V[3, 4, 2] += delta
    assert error_norm(U, V, g) == pytest.approx(delta * math.sqrt(g.hx * g.hy),
                                                rel=1e-14)


def test_error_norm_component_permutation_invariant():
    g = Grid2D(6, 6, 0.0, 1.0, 0.0, 1.0)
    rng = np.random.default_rng(1)
    U = rng.standard_normal((8, 6, 6))
    V = rng.standard_normal((8, 6, 6))
    perm = rng.permutation(8)
    assert error_norm(U, V, g) == pytest.approx(
        error_norm(U[perm], V[perm], g), rel=1e-14)


def test_error_norm_grid_mismatch():
    g = Grid2D(8, 8, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError, match="grid"):
        error_norm(np.zeros((8, 8, 8)), np.zeros((8, 8, 4)), g)


# --------------------------------------------------------------- rk4 helper

def test_rk4_integrator_is_fourth_order():
    rhs = lambda y: -2.0 * y
    y0 = np.array([1.0])
    errs = []
    for h in (0.1, 0.05, 0.025):
        y, stats = integrate_rk4(rhs, y0, 0.0, 1.0, h)
        errs.append(abs(y[0] - math.exp(-2.0)))
        assert stats.rhs_evals == stats.steps_accepted * 4
    assert math.log2(errs[0] / errs[1]) == pytest.approx(4.0, abs=0.3)


# ---------------------------------------------------------------- reference

def test_reference_rhs_free_of_cache_effects(tmp_path):
    cfg = ExperimentConfig(nx=16, ny=8, t_final=0.2, tolerances=(1e-3,),
                           reference_tol=1e-9)
    first = reference_solution(cfg, str(tmp_path))
    second = reference_solution(cfg, str(tmp_path))
    assert np.array_equal(first, second)    # cache hit is bitwise identical


def test_reference_disagreement_is_fatal(tmp_path):
    cfg = ExperimentConfig(nx=16, ny=8, t_final=0.2, tolerances=(1e-3,),
                           reference_tol=1e-9, reference_check=1e-16)
    with pytest.raises(ReferenceDisagreement):
        reference_solution(cfg, str(tmp_path))


# ------------------------------------------------------------------ sweeps

def test_run_experiment_writes_records_and_snapshots(tmp_path):
    cfg = parse_config(write_cfg(tmp_path))
    out = tmp_path / "out"
    records = run_experiment(cfg, str(out), snapshot_times=[0.2])
    assert len(records) == 2
    assert all(rec.status == "ok" for rec in records)
    assert all(rec.seconds > 0.0 for rec in records)
    assert all(rec.error >= 0.0 for rec in records)

    meta, rows = read_records_csv(str(out / "records.csv"))
    assert meta["problem"] == "reconnection"
    assert meta["concurrency"] == "sequential"
    assert meta["gamma"]          # defaults are expanded into the header
    assert len(rows) == 2
    assert rows[0]["method"] == "epirk5p1"
    assert float(rows[0]["control"]) == 1e-2

    snap = out / "reconnection-epirk5p1-c0.01-t0.2.mhd25"
    U, grid, time, _ = read_snapshot(str(snap))
    assert time == 0.2
    assert (grid.nx, grid.ny) == (16, 8)
    assert np.all(np.isfinite(U))


def test_csv_deterministic_modulo_seconds(tmp_path):
    cfg = parse_config(write_cfg(tmp_path))
    rec1 = run_experiment(cfg, str(tmp_path / "a"))
    rec2 = run_experiment(cfg, str(tmp_path / "b"),
                          cache_dir=str(tmp_path / "a" / "cache"))
    for a, b in zip(rec1, rec2):
        assert a.error == b.error
        assert a.stats.operator_applies == b.stats.operator_applies
        assert a.stats.steps_accepted == b.stats.steps_accepted


def test_failure_rows_do_not_abort_sweep(tmp_path):
    # an explicit RK4 step far above the diffusive stability limit blows
    # up; the stable point afterwards must still run
    text = """
problem = reconnection
nx = 32
ny = 16
mu = 5.0
method = rk4-explicit-reference
step_sizes = 0.5,0.02
t_final = 1.0
reference_tol = 1e-9
"""
    cfg = parse_config(write_cfg(tmp_path, text))
    records = run_experiment(cfg, str(tmp_path / "out"))
    assert records[0].status.startswith("failed:")
    assert math.isnan(records[0].error)
    assert records[1].status == "ok"
    _, rows = read_records_csv(str(tmp_path / "out" / "records.csv"))
    assert rows[0]["error"] == "nan"


# --------------------------------------------------------------------- cli

def test_cli_run_and_check_divb(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path)
    out = str(tmp_path / "out")
    assert cli.main(["run", "--config", cfg_path, "--out", out,
                     "--snapshots", "0.2"]) == 0
    shown = capsys.readouterr().out
    assert "error=" in shown

    snap = f"{out}/reconnection-epirk5p1-c0.01-t0.2.mhd25"
    assert cli.main(["check-divb", "--snapshot", snap]) == 0
    assert "max|div B|" in capsys.readouterr().out


def test_cli_reference_command(tmp_path):
    cfg_path = write_cfg(tmp_path)
    assert cli.main(["reference", "--config", cfg_path,
                     "--out", str(tmp_path / "out")]) == 0


def test_cli_config_error_exit_code(tmp_path):
    bad = write_cfg(tmp_path, "problem = vortex\n", name="bad.cfg")
    assert cli.main(["run", "--config", bad]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["check-divb", "--snapshot",
                     str(tmp_path / "missing.mhd25")]) == 2


def test_cli_reference_disagreement_exit_code(tmp_path):
    text = SMALL + "reference_check = 1e-16\n"
    assert cli.main(["run", "--config", write_cfg(tmp_path, text),
                     "--out", str(tmp_path / "out")]) == 3


def test_cli_all_failed_exit_code(tmp_path):
    text = """
problem = reconnection
nx = 32
ny = 16
mu = 5.0
method = rk4-explicit-reference
step_sizes = 0.5,0.4
t_final = 1.0
reference_tol = 1e-9
"""
    assert cli.main(["run", "--config", write_cfg(tmp_path, text),
                     "--out", str(tmp_path / "out")]) == 4
