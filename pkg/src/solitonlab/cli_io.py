"""Scenario-driven command line: parse configs, run solvers, write CSV, SVG and a manifest.

Usage::

    solitonlab <scenario> [--key=value ...] [--config path] [--out dir]

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 I/O failure. The output directory defaults to ``solitonlab-out/<scenario>``;
the ``SOLITONLAB_OUT`` environment variable overrides the default and a
config-file ``out`` key, and ``--out`` overrides everything.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

__all__ = [
    "SCHEMA_VERSION",
    "SCENARIOS",
    "ConfigError",
    "ScenarioConfig",
    "ArtifactManifest",
    "PlotSpec",
    "parse_config",
    "run_scenario",
    "write_csv",
    "read_csv",
    "emit_plot",
    "main",
]

SCHEMA_VERSION = 1
ENV_OUT = "SOLITONLAB_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    """Unknown key, unparsable value or missing scenario."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Key:
    default: object
    kind: type
    choices: tuple = ()
    doc: str = ""


SCENARIOS = {
    "dirac-soliton": {
        "kappa": _Key(-1, int, (-1, 1), "angular quantum number"),
        "alpha_min": _Key(0.01, float, doc="lower end of the coupling scan"),
        "alpha_max": _Key(0.3, float, doc="upper end of the coupling scan"),
        "beta_min": _Key(0.05, float, doc="lower end of the energy scan"),
        "beta_max": _Key(0.95, float, doc="upper end of the energy scan"),
        "n_scan": _Key(7, int, doc="points of the coarse energy scan"),
        "rho_max": _Key(30.0, float, doc="outer radius in Compton lengths"),
        "rho_min": _Key(1e-4, float, doc="inner stopping radius"),
        "n_points": _Key(3000, int, doc="grid points per shot"),
        "ivp_tol": _Key(1e-10, float, doc="relative tolerance of each shot"),
    },
    "photon-soliton": {
        "linear": _Key(1.0, float, doc="linear coefficient of the ground-state equation"),
        "a_min": _Key(2.0, float, doc="smallest family amplitude"),
        "a_max": _Key(200.0, float, doc="largest family amplitude"),
        "n_members": _Key(9, int, doc="family members, log spaced"),
        "n_points": _Key(4001, int, doc="grid points per family member"),
        "rho_max": _Key(30.0, float, doc="ground-state grid radius"),
    },
    "uehling": {
        "Z": _Key(1.0, float, doc="point charge in units of e"),
        "c1": _Key(1.0, float, doc="amplitude of the decaying vacuum solution"),
        "r_min": _Key(1e-15, float, doc="smallest radius in metres"),
        "r_max": _Key(1e-11, float, doc="largest radius in metres"),
        "n": _Key(400, int, doc="radii, log spaced"),
    },
    "trajectories": {
        "setup": _Key("double-slit", str, ("double-slit", "gaussian", "plane-wave", "pair"), "guiding field"),
        "n": _Key(100, int, doc="number of trajectories"),
        "n_steps": _Key(400, int, doc="integration steps"),
        "t_end": _Key(4.0, float, doc="final time (stream coordinate for double-slit)"),
        "separation": _Key(100.0, float, doc="slit separation in wavelengths"),
        "width": _Key(10.0, float, doc="beam waist in wavelengths"),
        "screen": _Key(1e4, float, doc="screen distance in wavelengths"),
        "k0": _Key(1.0, float, doc="packet or plane-wave wave number"),
        "sigma0": _Key(1.0, float, doc="initial packet width"),
    },
    "equivariance": {
        "setup": _Key("gaussian", str, ("gaussian", "double-slit"), "guiding field"),
        "n": _Key(10000, int, doc="samples"),
        "bins": _Key(50, int, doc="histogram bins"),
        "t_end": _Key(4.0, float, doc="transport time for the Gaussian packet"),
        "sigma0": _Key(1.0, float, doc="initial packet width"),
        "k0": _Key(1.0, float, doc="packet wave number"),
    },
    "bloch": {
        "omega": _Key(1.0, float, doc="drive angular frequency"),
        "omega_a": _Key(1.1, float, doc="atomic angular frequency"),
        "epsilon": _Key(0.05, float, doc="drive amplitude"),
        "tau0": _Key(math.inf, float, doc="relaxation time; inf disables damping"),
        "n_cycles": _Key(100.0, float, doc="drive periods to integrate"),
        "n_samples": _Key(4001, int, doc="output samples"),
        "u0": _Key(0.0, float), "v0": _Key(0.0, float), "w0": _Key(0.0, float),
    },
    "dipole-decay": {
        "wavelength_nm": _Key(500.0, float, doc="vacuum wavelength in nanometres"),
        "lambda_min_nm": _Key(1e-3, float, doc="sweep start"),
        "lambda_max_nm": _Key(1e4, float, doc="sweep end"),
        "n": _Key(141, int, doc="sweep points, log spaced"),
    },
}

@dataclass
class ScenarioConfig:
    """Validated scenario parameters with every default filled in."""

    scenario: str
    params: dict
    out_dir: Path
    seed: int = 0

    def echo(self):
        """JSON-safe copy of the configuration for the manifest."""
        return {"scenario": self.scenario, "seed": self.seed,
                "params": {k: _json_num(v) for k, v in sorted(self.params.items())}}


def _coerce(key, raw, spec: _Key):
    text = str(raw).strip()
    try:
        if spec.kind is int:
            f = float(text)
            if not f.is_integer():
                raise ValueError
            val = int(f)
        elif spec.kind is float:
            val = float(text)
            if math.isnan(val):
                raise ValueError
        else:
            val = text
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r} as {spec.kind.__name__}") from None
    if spec.choices and val not in spec.choices:
        raise ConfigError(f"{key}: {text!r} is not one of {', '.join(map(str, spec.choices))}")
    return val


def _parse_lines(text):
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _parse_flags(flags):
    if flags is None:
        return {}
    if isinstance(flags, dict):
        return {str(k): v for k, v in flags.items()}
    out = {}
    for f in flags:
        if not f.startswith("--") or "=" not in f:
            raise ConfigError(f"expected --key=value, got {f!r}")
        k, v = f[2:].split("=", 1)
        out[k.strip().replace("-", "_")] = v
    return out


def parse_config(text="", flags=None, *, scenario=None, out_dir=None, env=None) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from ``key=value`` text and overrides.

    Parameters
    ----------
    text : str
        Config file contents; ``#`` starts a comment.
    flags : list of str or dict, optional
        ``--key=value`` overrides; they win over ``text``.
    scenario : str, optional
        Scenario name given outside the text; it must agree with a
        ``scenario`` key in the text if both are present.
    out_dir : str, optional
        Explicit output directory; beats the environment and the text.
    env : mapping, optional
        Environment used for the output-directory override; ``os.environ``
        by default.

    Raises
    ------
    ConfigError
        Missing or unknown scenario, unknown key or unparsable value. The
        message starts with the offending key.
    """
    vals = _parse_lines(text)
    vals.update(_parse_flags(flags))
    name = vals.pop("scenario", None)
    if scenario is not None:
        if name is not None and name != scenario:
            raise ConfigError(f"scenario: {name!r} in the config conflicts with {scenario!r}")
        name = scenario
    if not name:
        raise ConfigError("scenario: missing scenario name")
    if name not in SCENARIOS:
        raise ConfigError(f"scenario: unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    specs = SCENARIOS[name]
    seed = _coerce("seed", vals.pop("seed", 0), _Key(0, int))
    out_text = vals.pop("out", None)
    params = {}
    for k, raw in vals.items():
        if k not in specs:
            raise ConfigError(f"{k}: unknown key for scenario {name!r}")
        params[k] = _coerce(k, raw, specs[k])
    for k, spec in specs.items():
        params.setdefault(k, spec.default)
    env = os.environ if env is None else env
    if out_dir is not None:
        out = Path(out_dir)
    elif env.get(ENV_OUT):
        out = Path(env[ENV_OUT])
    elif out_text:
        out = Path(out_text)
    else:
        out = Path("solitonlab-out") / name
    return ScenarioConfig(name, params, out, seed)


# ---------------------------------------------------------------------------
# CSV and manifest
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v) + 0.0)
    return str(v)


def _json_num(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def write_csv(path, schema, columns, rows):
    """Write a versioned CSV: a ``# schema=<name> version=<n>`` line, then the header.

    Floats are written with 17 significant digits so they round-trip.
    Returns the number of data rows.
    """
    buf = io.StringIO()
    buf.write(f"# schema={schema} version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    n = 0
    for r in rows:
        if len(r) != len(columns):
            raise ValueError(f"{schema}: row has {len(r)} fields, header has {len(columns)}")
        w.writerow([_fmt(v) for v in r])
        n += 1
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
    return n


def read_csv(path):
    """Read a CSV written by :func:`write_csv`.

    Returns
    -------
    schema : str
    columns : dict of ndarray
        Numeric columns as float arrays, others as string arrays.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    schema = ""
    if lines and lines[0].startswith("#"):
        schema = lines[0][1:].strip()
        lines = lines[1:]
    rows = list(csv.reader(lines))
    if not rows:
        raise ValueError(f"{path}: no header")
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in body]
        try:
            cols[name] = np.array([float(x) for x in raw], dtype=float)
        except ValueError:
            cols[name] = np.array(raw, dtype=str)
    return schema, cols


def _report_dict(rep):
    if rep is None:
        return None
    return {"converged": bool(rep.converged), "iterations": int(rep.iterations),
            "final_residual": _json_num(rep.final_residual), "tolerance": _json_num(rep.tolerance),
            "diagnostics": [str(d) for d in rep.diagnostics]}


@dataclass
class ArtifactManifest:
    """Emitted files, the configuration echo and the solver reports of one run."""

    config: dict
    out_dir: Path
    files: list = field(default_factory=list)
    reports: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    status: str = "ok"

    @property
    def converged(self):
        return self.status == "ok"

    def add_csv(self, name, schema, columns, rows):
        n = write_csv(self.out_dir / name, schema, columns, rows)
        self.files.append({"path": name, "kind": "csv", "schema": schema, "version": SCHEMA_VERSION,
                           "columns": list(columns), "rows": n})
        return self.out_dir / name

    def add_plot(self, csv_name, spec: "PlotSpec"):
        name = f"{Path(csv_name).stem}.svg"
        emit_plot(self.out_dir / csv_name, spec, self.out_dir / name)
        self.files.append({"path": name, "kind": "svg", "source": csv_name, "version": SCHEMA_VERSION})

    def add_report(self, name, rep):
        self.reports[name] = _report_dict(rep)
        if rep is not None and not rep.converged:
            self.status = "non-converged"

    def as_dict(self):
        return {"tool": "solitonlab", "tool_version": __version__, "schema_version": SCHEMA_VERSION,
                "status": self.status, "config": self.config, "files": self.files,
                "reports": self.reports, "summary": {k: _json_num(v) for k, v in self.summary.items()}}

    def write(self):
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def _dirac(cfg: ScenarioConfig, man: ArtifactManifest):
    from .dirac_soliton import DiracTolerances, solve_soliton

    p = cfg.params
    tol = DiracTolerances(ivp=p["ivp_tol"], n_points=p["n_points"])
    sol = solve_soliton(p["kappa"], tol, alpha_bracket=(p["alpha_min"], p["alpha_max"]),
                        beta_bracket=(p["beta_min"], p["beta_max"]), n_scan=p["n_scan"],
                        rho_max=p["rho_max"], rho_min=p["rho_min"])
    man.add_report("solve_soliton", sol.report)
    order = np.argsort(sol.rho)
    tr = sol.trace
    rows = zip(sol.rho[order], tr.f_hat[order], tr.g_hat[order], tr.v_hat[order], tr.dv_hat[order])
    man.add_csv("profiles.csv", "dirac-profiles", ("rho", "f", "g", "V", "dV"), rows)
    obs = sol.observables.as_dict() if sol.observables is not None else {}
    extra = {"alpha": sol.params.alpha, "beta": sol.params.beta}
    extra.update({f"constraint_{k}": v for k, v in sol.constraints.items() if np.isscalar(v)})
    man.add_csv("observables.csv", "dirac-observables", ("name", "value"),
                [(k, v) for k, v in list(obs.items()) + list(extra.items())])
    man.summary.update({"alpha": sol.params.alpha, "beta": sol.params.beta, "spin": obs.get("spin", math.nan)})
    man.add_plot("profiles.csv", PlotSpec("rho", ("f", "g"), logx=True, title="radial pair"))


def _photon(cfg: ScenarioConfig, man: ArtifactManifest):
    from .numerics import RadialGrid
    from .photon_soliton import PhotonUnits, cubic_family, ground_state, soliton_energy

    p = cfg.params
    units = PhotonUnits.from_constants()
    grid = RadialGrid.linear(0.0, p["rho_max"], 6001)
    a_star, prof, rep = ground_state(p["linear"], grid=grid)
    man.add_report("ground_state", rep)
    ok = np.isfinite(prof.E_tilde)
    man.add_csv("profiles.csv", "photon-profiles", ("rho", "E", "dE"),
                zip(prof.rho[ok], prof.E_tilde[ok], prof.dE_tilde[ok]))
    amps = np.geomspace(p["a_min"], p["a_max"], p["n_members"])
    _, table = cubic_family(amps, n_points=p["n_points"], units=units)
    cols = ("a", "radius_re", "energy_mec2", "central_field_Ecl")
    man.add_csv("family.csv", "photon-family", cols, zip(*(table[c] for c in cols)))
    slope = float(np.polyfit(np.log(table["radius_re"]), np.log(table["energy_mec2"]), 1)[0])
    e = soliton_energy(prof, units)
    man.summary.update({"a_star": a_star, "ground_energy_mec2": e.energy_mec2, "ground_radius_re": e.radius_re,
                        "family_loglog_slope": slope, "eps_b_mec2": units.eps_b_mec2})
    man.add_plot("profiles.csv", PlotSpec("rho", ("E",), title="ground state"))
    man.add_plot("family.csv", PlotSpec("radius_re", ("energy_mec2",), logx=True, logy=True,
                                        title="energy against radius"))


def _uehling(cfg: ScenarioConfig, man: ArtifactManifest):
    from .numerics import PhysicalConstants
    from .photon_soliton import uehling_point_asymptotics, uehling_vacuum

    p = cfg.params
    if not 0 < p["r_min"] < p["r_max"]:
        raise ConfigError("r_min: need 0 < r_min < r_max")
    c = PhysicalConstants.codata()
    r = np.geomspace(p["r_min"], p["r_max"], p["n"])
    a = uehling_point_asymptotics(r, p["Z"], c)
    coul = -p["Z"] * c.coulomb_volts_metre / r
    man.add_csv("uehling.csv", "uehling-point", ("r", "V", "V_coulomb", "correction", "branch"),
                zip(r, a.V, coul, a.correction, a.branch))
    vac = uehling_vacuum(p["c1"], c)
    man.add_csv("vacuum.csv", "uehling-vacuum", ("r", "phi", "residual"), zip(r, vac(r), vac.residual(r)))
    man.summary.update({"crossover_m": a.crossover, "branch_jump": a.jump,
                        "vacuum_max_residual": float(np.max(np.abs(vac.residual(r))))})
    man.add_plot("uehling.csv", PlotSpec("r", ("correction",), logx=True, title="relative correction"))


def _trajectories(cfg: ScenarioConfig, man: ArtifactManifest):
    from . import pilot_wave as pw

    p = cfg.params
    rng = np.random.default_rng(cfg.seed)
    n = p["n"]
    if n < 1:
        raise ConfigError("n: need at least one trajectory")
    law = pw.GuidanceLaw("schrodinger")
    cols = ("traj_id", "t", "x", "y")
    if p["setup"] == "double-slit":
        f, g = pw.double_slit_field(p["separation"], p["width"], 1.0, p["screen"])
        half = 0.5 * g.separation + 4 * g.width
        X0 = pw.sample_born(f, n, (-half, half), rng, fixed=(0.0,))
        stamps = np.concatenate(([0.0], np.geomspace(1.0, g.screen_distance, p["n_steps"])))
        ts, X, halted = pw.integrate_ensemble(f, law, X0, None, stamps)
        rows = ((i, ts[j], X[j, i, 0], X[j, i, 1]) for i in range(n) for j in range(ts.size))
        man.summary["fringe_spacing"] = g.fringe_spacing
    elif p["setup"] == "pair":
        field2 = pw.relative_state(p["k0"])
        rows, halted = [], np.zeros(n, dtype=bool)
        starts = rng.uniform(-np.pi, np.pi, (n, 2))
        for i, (a, b) in enumerate(starts):
            tr = pw.integrate_pair(field2, law, [a], [b], (0.0, p["t_end"]), p["t_end"] / p["n_steps"])
            halted[i] = tr.status != "ok"
            rows.extend((i, t, pos[0, 0], 0.0, pos[1, 0], 0.0) for t, pos in zip(tr.times, tr.positions))
        cols = ("traj_id", "t", "x", "y", "x2", "y2")
    else:
        if p["setup"] == "gaussian":
            f = pw.gaussian_packet(0.0, p["k0"], p["sigma0"])
            x0 = pw.sample_born(f, n, (-6 * p["sigma0"], 6 * p["sigma0"]), rng)[:, 0]
        else:
            f = pw.plane_wave(p["k0"])
            x0 = rng.uniform(0.0, 2 * np.pi / p["k0"], n)
        ts, X, halted = pw.integrate_ensemble(f, law, x0[:, None], (0.0, p["t_end"]), p["t_end"] / p["n_steps"])
        rows = ((i, ts[j], X[j, i, 0], 0.0) for i in range(n) for j in range(ts.size))
    man.add_csv("trajectories.csv", f"trajectories-{p['setup']}", cols, rows)
    man.summary.update({"setup": p["setup"], "n": n, "halted": int(np.sum(halted))})
    x, y = ("y", ("x",)) if p["setup"] == "double-slit" else ("t", ("x",))
    man.add_plot("trajectories.csv", PlotSpec(x, y, title=f"{p['setup']} trajectories", group="traj_id"))


def _equivariance(cfg: ScenarioConfig, man: ArtifactManifest):
    from . import pilot_wave as pw

    p = cfg.params
    law = pw.GuidanceLaw("schrodinger")
    if p["setup"] == "gaussian":
        s = p["sigma0"]
        f = pw.gaussian_packet(0.0, p["k0"], s)
        res = pw.equivariance_check(f, law, p["n"], (0.0, p["t_end"]), (-6 * s, 6 * s), bins=p["bins"],
                                    seed=cfg.seed)
    else:
        f, g = pw.double_slit_field()
        stamps = np.concatenate(([0.0], np.geomspace(1.0, g.screen_distance, 600)))
        res = pw.equivariance_check(f, law, p["n"], (0.0, g.screen_distance), (-90.0, 90.0), bins=p["bins"],
                                    dt=stamps, seed=cfg.seed, final_range=(-400.0, 400.0))
    centres = 0.5 * (res.edges[1:] + res.edges[:-1])
    width = np.diff(res.edges)
    total = res.counts.sum()
    psi2 = res.psi2 / res.psi2.sum() * total
    man.add_csv("histogram.csv", f"equivariance-{p['setup']}", ("bin_center", "count", "psi2"),
                zip(centres, res.counts, psi2))
    man.summary.update({"divergence": res.divergence, "halted": res.halted, "bin_width": float(width[0])})
    man.add_plot("histogram.csv", PlotSpec("bin_center", ("count", "psi2"), title="endpoint histogram"))


def _bloch(cfg: ScenarioConfig, man: ArtifactManifest):
    from .two_level import BlochState, DriveParams, integrate_bloch

    p = cfg.params
    try:
        drive = DriveParams(p["omega"], p["omega_a"], p["epsilon"], p["tau0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    tr = integrate_bloch(drive, BlochState(p["u0"], p["v0"], p["w0"]), n_cycles=p["n_cycles"],
                         n_samples=p["n_samples"])
    man.add_report("integrate_bloch", tr.report)
    f = tr.forces
    cols = ("t", "u", "v", "w", "F_restoring", "F_dissipation", "F_driving", "F_quantum")
    man.add_csv("bloch.csv", "bloch", cols,
                zip(tr.t, tr.u, tr.v, tr.w, f["restoring"], f["dissipation"], f["driving"], f["quantum"]))
    man.summary.update({"norm_drift": float(np.max(np.abs(tr.norm - tr.norm[0]))),
                        "closure_max": float(np.max(tr.closure)), "w_max": float(np.max(tr.w))})
    man.add_plot("bloch.csv", PlotSpec("t", ("u", "v", "w"), title="Bloch components"))


def _dipole(cfg: ScenarioConfig, man: ArtifactManifest):
    from .numerics import PhysicalConstants
    from .two_level import dipole_decay_params

    p = cfg.params
    c = PhysicalConstants.codata()
    lam = np.geomspace(p["lambda_min_nm"], p["lambda_max_nm"], p["n"]) * 1e-9
    cols = ("wavelength_m", "omega", "tau", "Gamma", "phase_alpha", "delta_omega", "regime_ok")

    def row(l):
        d = dipole_decay_params(2 * np.pi * c.speed_of_light / l, c)
        return (l, d.omega, d.tau, d.Gamma, d.phase_alpha, d.delta_omega, d.regime_ok)

    man.add_csv("dipole.csv", "dipole-sweep", cols, (row(l) for l in lam))
    ex = row(p["wavelength_nm"] * 1e-9)
    man.add_csv("dipole-example.csv", "dipole-example", ("name", "value"), zip(cols, ex))
    man.summary.update(dict(zip(cols, ex)))
    man.add_plot("dipole.csv", PlotSpec("wavelength_m", ("Gamma",), logx=True, logy=True, title="decay rate"))


_RUNNERS = {
    "dirac-soliton": _dirac,
    "photon-soliton": _photon,
    "uehling": _uehling,
    "trajectories": _trajectories,
    "equivariance": _equivariance,
    "bloch": _bloch,
    "dipole-decay": _dipole,
}


def run_scenario(config: ScenarioConfig) -> ArtifactManifest:
    """Run one scenario and write its CSVs, plots and ``manifest.json``.

    Returns the manifest; ``manifest.status`` is ``"non-converged"`` when
    a solver report failed, in which case the best iterate is still
    written. ``OSError`` propagates for I/O failures.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    man = ArtifactManifest(config.echo(), out)
    try:
        _RUNNERS[config.scenario](config, man)
    except ConfigError:
        raise
    except OSError:
        raise
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        man.status = "non-converged"
        man.summary["error"] = f"{type(exc).__name__}: {exc}"
    man.write()
    return man


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlotSpec:
    """Line chart of ``y`` columns against ``x``; ``group`` splits rows into separate lines."""

    x: str
    y: tuple
    logx: bool = False
    logy: bool = False
    title: str = ""
    group: str | None = None

    def __post_init__(self):
        if isinstance(self.y, str):
            object.__setattr__(self, "y", (self.y,))


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")
_W, _H, _M = 640, 420, 60


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [float(v) for v in range(a, b + 1, step)]
    return [float(v) for v in np.linspace(lo, hi, 5)]


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def emit_plot(csv_path, spec: PlotSpec, out_path=None) -> Path:
    """Render a standalone, byte-deterministic SVG line chart from a CSV.

    Log axes plot ``log10`` of the data; the root element carries
    ``data-logx``/``data-logy`` attributes and the axis labels say
    ``log10(...)``. Non-positive values on a log axis are dropped.

    Raises
    ------
    KeyError
        A requested column is missing; the message names it.
    """
    csv_path = Path(csv_path)
    _, cols = read_csv(csv_path)
    for name in (spec.x,) + tuple(spec.y) + ((spec.group,) if spec.group else ()):
        if name not in cols:
            raise KeyError(f"column {name!r} not found in {csv_path.name}")
    out_path = Path(out_path) if out_path is not None else csv_path.with_suffix(".svg")

    def tx(v, log):
        v = np.asarray(v, dtype=float)
        if log:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(v > 0, np.log10(v), np.nan)
        return v

    X = tx(cols[spec.x], spec.logx)
    Ys = [tx(cols[y], spec.logy) for y in spec.y]
    groups = cols[spec.group] if spec.group else np.zeros(X.size)
    allx = X[np.isfinite(X)]
    ally = np.concatenate([y[np.isfinite(y)] for y in Ys]) if Ys else np.array([])
    if allx.size == 0 or ally.size == 0:
        raise ValueError(f"{csv_path.name}: nothing finite to plot")
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def px(v):
        return _M + (v - x0) / (x1 - x0) * (_W - 2 * _M)

    def py(v):
        return _H - _M - (v - y0) / (y1 - y0) * (_H - 2 * _M)

    lx = f"log10({spec.x})" if spec.logx else spec.x
    ly = f"log10({', '.join(spec.y)})" if spec.logy else ", ".join(spec.y)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        f'data-logx="{str(spec.logx).lower()}" data-logy="{str(spec.logy).lower()}">',
        f"<title>{_esc(spec.title or csv_path.name)}</title>",
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" height="{_H - 2 * _M}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1, spec.logx):
        if x0 <= t <= x1:
            parts.append(f'<text x="{px(t):.2f}" y="{_H - _M + 16}" font-size="11" text-anchor="middle">'
                         f"{_esc(format(t, '.4g'))}</text>")
    for t in _ticks(y0, y1, spec.logy):
        if y0 <= t <= y1:
            parts.append(f'<text x="{_M - 6}" y="{py(t):.2f}" font-size="11" text-anchor="end">'
                         f"{_esc(format(t, '.4g'))}</text>")
    parts.append(f'<text x="{_W / 2:.1f}" y="{_H - 14}" font-size="13" text-anchor="middle" '
                 f'class="xlabel">{_esc(lx)}</text>')
    parts.append(f'<text x="16" y="{_H / 2:.1f}" font-size="13" text-anchor="middle" class="ylabel" '
                 f'transform="rotate(-90 16 {_H / 2:.1f})">{_esc(ly)}</text>')
    parts.append(f'<text x="{_W / 2:.1f}" y="24" font-size="14" text-anchor="middle">'
                 f"{_esc(spec.title)}</text>")
    keys = list(dict.fromkeys(groups.tolist()))
    for j, (name, Y) in enumerate(zip(spec.y, Ys)):
        colour = _COLOURS[j % len(_COLOURS)]
        for key in keys:
            sel = (groups == key) & np.isfinite(X) & np.isfinite(Y)
            if sel.sum() < 1:
                continue
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(X[sel], Y[sel]))
            parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" '
                         f'data-series="{_esc(name)}" points="{pts}"/>')
        parts.append(f'<text x="{_W - _M - 4}" y="{_M + 16 + 14 * j}" font-size="12" text-anchor="end" '
                     f'fill="{colour}">{_esc(name)}</text>')
    parts.append("</svg>")
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    """Command-line entry point; returns the exit code."""
    ap = argparse.ArgumentParser(prog="solitonlab", description=__doc__.splitlines()[0])
    ap.add_argument("scenario", nargs="?", help=f"one of: {', '.join(SCENARIOS)}")
    ap.add_argument("--config", help="key=value config file")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--list-keys", action="store_true", help="print the parameters of the scenario and exit")
    args, rest = ap.parse_known_args(argv)
    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                print(f"solitonlab: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
        if args.list_keys:
            name = args.scenario or _parse_lines(text).get("scenario")
            if name not in SCENARIOS:
                raise ConfigError(f"scenario: unknown scenario {name!r}")
            for k, s in SCENARIOS[name].items():
                print(f"{k}={_fmt(s.default)}  # {s.doc}" if s.doc else f"{k}={_fmt(s.default)}")
            return EXIT_OK
        cfg = parse_config(text, rest, scenario=args.scenario, out_dir=args.out)
    except ConfigError as exc:
        print(f"solitonlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        man = run_scenario(cfg)
    except ConfigError as exc:
        print(f"solitonlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"solitonlab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(man.files)} files and manifest.json to {cfg.out_dir}")
    if not man.converged:
        print(f"solitonlab: solver did not converge; see {cfg.out_dir / 'manifest.json'}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
