import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab import cli_io
from solitonlab.cli_io import (
    SCENARIOS,
    ConfigError,
    PlotSpec,
    emit_plot,
    main,
    parse_config,
    read_csv,
    run_scenario,
    write_csv,
)
from solitonlab.numerics import SolveReport

NO_ENV = {}


def test_parse_config_fills_defaults():
    cfg = parse_config("scenario=dirac-soliton\nkappa=-1", env=NO_ENV)
    assert cfg.scenario == "dirac-soliton"
    assert cfg.params["kappa"] == -1
    assert set(cfg.params) == set(SCENARIOS["dirac-soliton"])


def test_flag_overrides_file():
    cfg = parse_config("scenario=trajectories\nwidth=5", ["--width=7.5"], env=NO_ENV)
    assert cfg.params["width"] == 7.5


def test_bad_value_names_key():
    with pytest.raises(ConfigError, match="^kappa"):
        parse_config("scenario=dirac-soliton\nkappa=banana", env=NO_ENV)
    with pytest.raises(ConfigError, match="^kappa"):
        parse_config("scenario=dirac-soliton\nkappa=3", env=NO_ENV)


def test_unknown_key_and_missing_scenario():
    with pytest.raises(ConfigError, match="^zeta"):
        parse_config("scenario=bloch\nzeta=1", env=NO_ENV)
    with pytest.raises(ConfigError, match="scenario"):
        parse_config("omega=1", env=NO_ENV)
    with pytest.raises(ConfigError, match="scenario"):
        parse_config("scenario=warp-drive", env=NO_ENV)
    with pytest.raises(ConfigError):
        parse_config("scenario=bloch\njust words", env=NO_ENV)


def test_output_directory_precedence(tmp_path):
    env = {cli_io.ENV_OUT: str(tmp_path / "env")}
    assert parse_config("scenario=bloch\nout=file", env=NO_ENV).out_dir.name == "file"
    assert parse_config("scenario=bloch\nout=file", env=env).out_dir.name == "env"
    assert parse_config("scenario=bloch\nout=file", env=env, out_dir=tmp_path / "flag").out_dir.name == "flag"


@settings(max_examples=40, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_csv_round_trips_floats(tmp_path_factory, x):
    p = tmp_path_factory.mktemp("csv") / "t.csv"
    write_csv(p, "probe", ("x",), [(x,)])
    schema, cols = read_csv(p)
    assert schema == "schema=probe version=1"
    assert cols["x"][0] == x


def _run(tmp_path, text, flags=()):
    cfg = parse_config(text, list(flags), out_dir=tmp_path, env=NO_ENV)
    return run_scenario(cfg)


def test_bloch_scenario_schema(tmp_path):
    man = _run(tmp_path, "scenario=bloch\nn_cycles=5\nn_samples=201")
    assert man.converged
    _, cols = read_csv(tmp_path / "bloch.csv")
    assert list(cols) == ["t", "u", "v", "w", "F_restoring", "F_dissipation", "F_driving", "F_quantum"]
    data = json.loads((tmp_path / "manifest.json").read_text())
    assert {f["path"] for f in data["files"]} >= {"bloch.csv", "bloch.svg"}
    assert data["config"]["params"]["tau0"] == "inf"


def test_trajectory_scenario_is_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        run_scenario(parse_config("scenario=trajectories\nsetup=double-slit\nn=100\nseed=7", out_dir=d, env=NO_ENV))
    for name in ("trajectories.csv", "trajectories.svg", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    _, cols = read_csv(a / "trajectories.csv")
    assert list(cols) == ["traj_id", "t", "x", "y"]
    assert np.unique(cols["traj_id"]).size == 100


def test_pair_trajectories_have_second_particle(tmp_path):
    _run(tmp_path, "scenario=trajectories\nsetup=pair\nn=3\nn_steps=20\nt_end=1")
    _, cols = read_csv(tmp_path / "trajectories.csv")
    assert list(cols) == ["traj_id", "t", "x", "y", "x2", "y2"]


def test_dirac_scenario_schema(tmp_path, monkeypatch, dirac_minus):
    import solitonlab.dirac_soliton as ds

    monkeypatch.setattr(ds, "solve_soliton", lambda *a, **k: dirac_minus[0])
    man = _run(tmp_path, "scenario=dirac-soliton\nkappa=-1")
    assert man.converged
    _, prof = read_csv(tmp_path / "profiles.csv")
    assert list(prof) == ["rho", "f", "g", "V", "dV"]
    assert np.all(np.diff(prof["rho"]) > 0)
    _, obs = read_csv(tmp_path / "observables.csv")
    assert list(obs) == ["name", "value"]
    assert "spin" in list(obs["name"]) and "total_mass" in list(obs["name"])


def test_photon_scenario_family_columns(tmp_path):
    man = _run(tmp_path, "scenario=photon-soliton\nn_members=4\nn_points=1501")
    assert man.converged
    _, fam = read_csv(tmp_path / "family.csv")
    assert list(fam) == ["a", "radius_re", "energy_mec2", "central_field_Ecl"]
    _, prof = read_csv(tmp_path / "profiles.csv")
    assert list(prof) == ["rho", "E", "dE"]


def test_equivariance_histogram_schema(tmp_path):
    _run(tmp_path, "scenario=equivariance\nn=2000\nbins=20")
    _, h = read_csv(tmp_path / "histogram.csv")
    assert list(h) == ["bin_center", "count", "psi2"]
    assert h["count"].sum() == pytest.approx(h["psi2"].sum())


def test_plot_flags_log_axes_and_is_deterministic(tmp_path):
    p = tmp_path / "family.csv"
    write_csv(p, "photon-family", ("a", "radius_re", "energy_mec2"), [(1, 1.0, 2.0), (2, 2.0, 4.0), (3, 4.0, 8.0)])
    spec = PlotSpec("radius_re", ("energy_mec2",), logx=True, logy=True)
    s1 = emit_plot(p, spec, tmp_path / "a.svg").read_text()
    s2 = emit_plot(p, spec, tmp_path / "b.svg").read_text()
    assert s1 == s2
    assert 'data-logx="true"' in s1 and 'data-logy="true"' in s1
    assert "log10(radius_re)" in s1


def test_plot_two_series(tmp_path):
    p = tmp_path / "profiles.csv"
    write_csv(p, "dirac-profiles", ("rho", "f", "g"), [(0.1, 1.0, 2.0), (0.2, 0.5, 1.0)])
    svg = emit_plot(p, PlotSpec("rho", ("f", "g"))).read_text()
    assert svg.count("<polyline") == 2


def test_plot_missing_column_named(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, "probe", ("a", "b"), [(1, 2)])
    with pytest.raises(KeyError, match="zzz"):
        emit_plot(p, PlotSpec("a", ("zzz",)))


def test_main_exit_codes(tmp_path, capsys):
    assert main(["bloch", "--kappa=banana", "--out", str(tmp_path)]) == 2
    assert "kappa" in capsys.readouterr().err
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    assert main(["bloch", "--n_cycles=1", "--out", str(blocker / "sub")]) == 4
    assert main(["dipole-decay", "--out", str(tmp_path / "ok")]) == 0
    assert main(["uehling", "--config", str(tmp_path / "missing.cfg")]) == 4


def test_config_file_and_flags(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario=bloch\nn_cycles=2\nn_samples=101  # short\n")
    assert main(["--config", str(cfg), "--n_samples=51", "--out", str(tmp_path / "o")]) == 0
    _, cols = read_csv(tmp_path / "o" / "bloch.csv")
    assert cols["t"].size == 51


def test_nonconvergence_exit_code_keeps_manifest(tmp_path, monkeypatch):
    def failing(cfg, man):
        man.add_csv("partial.csv", "probe", ("x",), [(1.0,)])
        man.add_report("solver", SolveReport(False, 30, 1e-2, 1e-9, ["did not converge"]))

    monkeypatch.setitem(cli_io._RUNNERS, "bloch", failing)
    assert main(["bloch", "--out", str(tmp_path)]) == 3
    data = json.loads((tmp_path / "manifest.json").read_text())
    assert data["status"] == "non-converged"
    assert [f["path"] for f in data["files"]] == ["partial.csv"]
    assert data["reports"]["solver"]["converged"] is False


def test_every_scenario_has_runner():
    assert set(SCENARIOS) == set(cli_io._RUNNERS)
