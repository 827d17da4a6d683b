"""Acceptance criteria 1-10: one PASS/FAIL line each, repeated in the run summary.

Reference values and tolerances are pinned below. A failing line means
the criterion is not met by this implementation; see the decisions ledger
for the analysis.
"""

import time

import numpy as np
import pytest
import scipy.constants as sc
from conftest import record_acceptance

from solitonlab.dirac_soliton import (
    SPIN_TARGET,
    DiracParams,
    kg_companion_scan,
    kg_effective_potential_demo,
    ode_residual,
    similarity_transform,
)
from solitonlab.numerics import PhysicalConstants, RadialGrid, find_root
from solitonlab.photon_soliton import (
    PhotonUnits,
    cubic_family,
    ground_state,
    small_r_series,
    solve_transverse,
    uehling_point_asymptotics,
    uehling_vacuum,
)
from solitonlab.pilot_wave import (
    GuidanceLaw,
    depletion_centres,
    double_slit_field,
    entangled_pair_velocity,
    equivariance_check,
    fringe_minima,
    gaussian_packet,
    integrate_trajectory,
    plane_wave,
    product_state,
    two_mode_state,
)
from solitonlab.two_level import BlochState, DriveParams, dipole_decay_params, force_diagram, integrate_bloch

# criterion 1 and 2
ALPHA_RANGE = {-1: (0.090, 0.112), 1: (0.060, 0.078)}
BETA_RANGE = {-1: (0.30, 0.40), 1: (0.17, 0.23)}
SPIN_TOL = 1e-3
DIRAC_RUNTIME_S = 120.0
RESIDUAL_MAX = 1e-6
ORIGIN_TOL = 1e-3
# criterion 3
SIMILARITY_TAUS = (0.5, 2.0, 5.0)
SIMILARITY_TOL = 1e-10
# criterion 4
KG_PARAMS = DiracParams(kappa=-1, alpha=0.101, beta=0.35)
KG_A_RANGE, KG_N_A = (1e-3, 3.0), 9
# criterion 5
SERIES_AMPLITUDES = (1.0, 2.0, 5.0, 10.0)
SERIES_SLOPE, SERIES_SLOPE_TOL = 6.0, 0.5
# criterion 6
GROUND_GRIDS = (3001, 6001, 12001)
GROUND_DIGITS_RTOL = 1e-4
GROUND_EXPECTED, GROUND_EXPECTED_TOL = 4.34, 0.01
# criterion 7
FAMILY_SLOPE, FAMILY_SLOPE_TOL = 1.00, 0.05
UNIT_MEMBER_RADIUS_RE = (0.67, 1.5)
UNIT_MEMBER_FIELD_ECL = (6.7, 15.0)
# criterion 8
VACUUM_RESIDUAL_MAX = 1e-10
FAR_RATIO_RTOL = 1e-12
EPS_B_MEC2, EPS_B_TOL = 0.089, 1e-3
# criterion 9
STRAIGHT_TOL = 1e-10
FRINGE_RTOL = 0.02
EQUIVARIANCE_MAX = 0.05
MINIMA_SPACING_SHARE = 0.05
PRODUCT_TOL = 1e-10
WITNESS_MIN = 1e-3
# criterion 10
NORM_DRIFT_MAX = 1e-8
N_CYCLES = 1000
CLOSURE_RTOL = 1e-12
EXAMPLE_RTOL = 0.01
EXAMPLE_500NM = {"omega": 3.767e15, "tau": 6.266e-24, "Gamma": 8.894e7, "sin_alpha": 2.361e-8,
                 "delta_omega": 1.050}


def _verdict(n, title, checks):
    """Record one line for criterion ``n``; ``checks`` is a list of (name, ok, detail)."""
    ok = all(c[1] for c in checks)
    parts = "; ".join(f"{name} {'ok' if good else 'FAILED'} ({detail})" for name, good, detail in checks)
    record_acceptance(f"AC{n:<2d} {'PASS' if ok else 'FAIL'}  {title}: {parts}")
    return ok


def _inside(x, rng):
    return rng[0] <= x <= rng[1]


def _dirac_criterion(n, kappa, solved):
    sol, seconds = solved
    a, b = sol.params.alpha, sol.params.beta
    spin = sol.observables.spin
    point = _inside(a, ALPHA_RANGE[kappa]) and _inside(b, BETA_RANGE[kappa])
    res = ode_residual(sol)
    origin = max(sol.constraints["origin_small_rel"], sol.constraints["origin_rho_dlarge_rel"])
    cross = sol.scan["crossings"]
    fallback = sol.report.converged and origin < ORIGIN_TOL and res < RESIDUAL_MAX and all(cross.values())
    branch = "point values" if point else "fallback governs"
    checks = [
        ("point values", point, f"alpha={a:.5g} in {ALPHA_RANGE[kappa]}, beta={b:.5g} in {BETA_RANGE[kappa]}"),
        ("spin", abs(spin - SPIN_TARGET) <= SPIN_TOL, f"{spin:.6f}"),
        ("runtime", seconds < DIRAC_RUNTIME_S, f"{seconds:.1f} s"),
    ]
    fb = ("fallback", fallback,
          f"origin {origin:.2e} < {ORIGIN_TOL:g}, residual {res:.2e} < {RESIDUAL_MAX:g}, crossings {cross}")
    # the point-value line is informative once the property fallback governs
    governing = checks[1:] + [fb] if not point else checks
    shown = checks + [fb]
    ok = all(c[1] for c in governing)
    parts = "; ".join(f"{nm} {'ok' if g else 'FAILED'} ({d})" for nm, g, d in shown)
    record_acceptance(f"AC{n:<2d} {'PASS' if ok else 'FAIL'}  Dirac soliton kappa={kappa:+d} [{branch}]: {parts}")
    return ok


def test_ac1_dirac_kappa_minus(dirac_minus):
    assert _dirac_criterion(1, -1, dirac_minus)


def test_ac2_dirac_kappa_plus(dirac_plus):
    assert _dirac_criterion(2, 1, dirac_plus)


def test_ac3_similarity_invariance(dirac_minus):
    sol = dirac_minus[0]
    base = ode_residual(sol)
    checks = []
    for tau in SIMILARITY_TAUS:
        d = abs(ode_residual(similarity_transform(sol, tau)) - base)
        checks.append((f"tau={tau:g}", d < SIMILARITY_TOL, f"|delta residual|={d:.1e}"))
    assert _verdict(3, "similarity invariance", checks)


def test_ac4_kg_obstruction():
    t0 = time.perf_counter()
    kg = kg_companion_scan(KG_PARAMS, KG_A_RANGE, KG_N_A, system="kg")
    dirac = kg_companion_scan(KG_PARAMS, KG_A_RANGE, KG_N_A, system="dirac")
    demo = kg_effective_potential_demo(E=0.5)
    # where V > E + m the Dirac term dips below zero and the KG term rises above m^2
    deep = demo["V"] > demo["E"] + 1.0
    well = bool(np.all(demo["dirac"][deep] < 0) and np.argmin(demo["dirac"]) == 0)
    barrier = bool(np.all(demo["kg"][deep] > 1.0) and np.argmax(demo["kg"]) == 0)
    checks = [
        ("KG scan", not kg.found, f"{int(kg.completed.sum())}/{KG_N_A} shots, regular profile found={kg.found}"),
        ("Dirac control", dirac.found, f"regular profile found={dirac.found}"),
        ("effective potential", well and barrier, f"Dirac well at origin={well}, KG barrier at origin={barrier}"),
    ]
    record_time = time.perf_counter() - t0
    checks.append(("scan time", True, f"{record_time:.0f} s"))
    assert _verdict(4, "KG obstruction", checks)


def test_ac5_photon_series_order():
    checks = []
    for a in SERIES_AMPLITUDES:
        grid = RadialGrid.linear(0.0, 1.0 / a, 2001)
        prof = solve_transverse(a, False, grid)
        E_series, _ = small_r_series(a, prof.rho)
        x = a * prof.rho
        sel = (x >= 0.15) & (x <= 0.6)
        err = np.abs(prof.E_tilde[sel] - E_series[sel])
        slope = float(np.polyfit(np.log(x[sel]), np.log(err), 1)[0])
        checks.append((f"a={a:g}", abs(slope - SERIES_SLOPE) <= SERIES_SLOPE_TOL, f"slope={slope:.3f}"))
    assert _verdict(5, "photon series error O(rho^6)", checks)


def _brute_force_threshold(lo=4.0, hi=4.6, n=21, levels=3):
    """Scan amplitudes without bisection: the last 'turn' before the first 'node'."""
    grid = RadialGrid.linear(0.0, 30.0, 6001)
    for _ in range(levels):
        amps = np.linspace(lo, hi, n)
        node = [solve_transverse(a, grid=grid).outcome == "node" for a in amps]
        j = node.index(True)
        lo, hi = amps[j - 1], amps[j]
    return 0.5 * (lo + hi), hi - lo


def test_ac6_photon_ground_state():
    stars = []
    decays = True
    for n in GROUND_GRIDS:
        a, prof, _ = ground_state(1.0, grid=RadialGrid.linear(0.0, 30.0, n))
        stars.append(a)
        decays &= bool(np.all(prof.E_tilde > 0) and prof.E_tilde[-1] < 1e-6 * a)
    spread = (max(stars) - min(stars)) / stars[0]
    brute, width = _brute_force_threshold()
    checks = [
        ("grid reproducibility", spread < GROUND_DIGITS_RTOL, f"a*={stars[0]:.6f}, spread {spread:.1e}"),
        ("nodeless and decaying", decays, f"grids {GROUND_GRIDS}"),
        ("brute-force oracle", abs(brute - stars[1]) <= width, f"scan {brute:.5f} +- {width / 2:.1e}"),
        ("expected value", abs(stars[1] - GROUND_EXPECTED) < GROUND_EXPECTED_TOL, f"~{GROUND_EXPECTED}"),
    ]
    assert _verdict(6, "photon ground state", checks)


def test_ac7_energy_radius_scaling():
    units = PhotonUnits.from_constants()
    _, fam = cubic_family(np.geomspace(2.0, 200.0, 9), units=units)
    slope = float(np.polyfit(np.log(fam["radius_re"]), np.log(fam["energy_mec2"]), 1)[0])
    decades = float(np.log10(fam["radius_re"].max() / fam["radius_re"].min()))

    def energy_minus_one(a):
        return cubic_family([a], units=units)[1]["energy_mec2"][0] - 1.0

    a1, _ = find_root(energy_minus_one, (1.0, 10.0), 1e-12, kind="scalar")
    unit = cubic_family([a1], units=units)[1]
    r, E = unit["radius_re"][0], unit["central_field_Ecl"][0]
    checks = [
        ("log-log slope", abs(slope - FAMILY_SLOPE) <= FAMILY_SLOPE_TOL, f"{slope:.4f} over {decades:.1f} decades"),
        ("1 mc^2 radius", _inside(r, UNIT_MEMBER_RADIUS_RE), f"{r:.3f} r_e in {UNIT_MEMBER_RADIUS_RE}"),
        ("1 mc^2 central field", _inside(E, UNIT_MEMBER_FIELD_ECL), f"{E:.3f} E_cl in {UNIT_MEMBER_FIELD_ECL}"),
    ]
    assert _verdict(7, "energy-radius scaling", checks)


def test_ac8_uehling():
    c = PhysicalConstants.codata()
    r = np.geomspace(1e-17, 1e-11, 500)
    vac = np.max(uehling_vacuum(1.0, c).residual(r))
    lam, al = c.compton_length, c.fine_structure
    x = np.array([1.5, 2.0, 3.0, 6.0])
    corr = uehling_point_asymptotics(x * lam, 1, c).correction
    ratio = corr[1:] / corr[:-1]
    expect = np.exp(-2 * np.diff(x)) * (x[:-1] / x[1:]) ** 1.5
    far_err = float(np.max(np.abs(ratio / expect - 1)))
    lead = corr[0] / (al / (4 * np.sqrt(np.pi)) * np.exp(-2 * x[0]) / x[0] ** 1.5) - 1
    eps = PhotonUnits.from_constants(c).eps_b_mec2
    checks = [
        ("vacuum residual", vac < VACUUM_RESIDUAL_MAX, f"{vac:.1e}"),
        ("far-branch ratio", far_err < FAR_RATIO_RTOL and abs(lead) < FAR_RATIO_RTOL, f"max rel {far_err:.1e}"),
        ("eps_b", abs(eps - EPS_B_MEC2) <= EPS_B_TOL, f"{eps:.5f} m_e c^2"),
    ]
    assert _verdict(8, "Uehling and energy unit", checks)


def test_ac9_guidance(double_slit_ensemble):
    law = GuidanceLaw()
    tr = integrate_trajectory(plane_wave(1.3), law, [0.2], (0.0, 10.0), 0.01)
    straight = float(np.max(np.abs(tr.positions[:, 0] - (0.2 + 1.3 * tr.times))))

    f, g, ens = double_slit_ensemble
    mins = np.sort(fringe_minima(f, g.screen_distance, (-400.0, 400.0)))
    central = mins[np.abs(mins) < 0.75 * g.fringe_spacing]
    spacing = float(np.diff(central)[0])
    centres = depletion_centres(ens.finals, mins)
    align = float(np.nanmax(np.abs(centres - mins)) / g.fringe_spacing)

    gauss = equivariance_check(gaussian_packet(0.0, 1.0, 1.0), law, 10_000, (0.0, 4.0), (-6.0, 6.0), bins=50)

    pair = product_state(plane_wave(0.9), gaussian_packet(0.0, 0.5, 1.0))
    r1 = np.array([0.3])
    v_ref = entangled_pair_velocity(pair, law, r1, np.array([0.0]))[0][0]
    prod = max(abs(entangled_pair_velocity(pair, law, r1, np.array([r2]))[0][0] - v_ref)
               for r2 in np.linspace(-3, 3, 13))
    ent = two_mode_state(plane_wave(1.0), gaussian_packet(-2.0, 0.0, 1.0),
                         plane_wave(-1.0), gaussian_packet(2.0, 0.0, 1.0))
    v1 = [entangled_pair_velocity(ent, law, r1, np.array([r2]))[0][0] for r2 in np.linspace(-3, 3, 13)]
    witness = float(np.ptp(v1))
    checks = [
        ("plane wave straight", straight < STRAIGHT_TOL, f"{straight:.1e}"),
        ("fringe spacing", abs(spacing / g.fringe_spacing - 1) < FRINGE_RTOL,
         f"{spacing:.3f} vs lambda D/d={g.fringe_spacing:g}"),
        ("equivariance", gauss.divergence < EQUIVARIANCE_MAX, f"KL={gauss.divergence:.4f}, n=10^4"),
        ("endpoint minima", align < MINIMA_SPACING_SHARE,
         f"worst {100 * align:.2f}% of spacing over {mins.size} minima"),
        ("product state", prod < PRODUCT_TOL, f"max |dv1|={prod:.1e}"),
        ("two-mode witness", witness > WITNESS_MIN, f"spread of v1 over r2={witness:.3f}"),
    ]
    assert _verdict(9, "guidance", checks)


def test_ac10_bloch():
    p = DriveParams(omega=1.0, omega_a=1.1, epsilon=0.05)
    tr = integrate_bloch(p, BlochState(), n_cycles=N_CYCLES, n_samples=20_001)
    drift = float(np.max(np.abs(tr.norm - tr.norm[0])))
    scale = max(float(np.max(np.abs(v))) for v in tr.forces.values())
    closure = float(np.max(tr.closure)) / scale
    drives = [force_diagram(BlochState(0.0, 0.0, w), p).effective_drive for w in (0.5 - 1e-9, 0.5, 0.5 + 1e-9)]
    zero_cross = drives[0] < 0 and drives[1] == 0.0 and drives[2] > 0

    lam = 500e-9
    d = dipole_decay_params(2 * np.pi * sc.c / lam)
    identities = d.Gamma == d.tau * d.omega**2 and d.delta_omega == 0.5 * d.tau**2 * d.omega**3
    # independent route: r_e from e^2/(4 pi eps0 m c^2)
    r_e = sc.e**2 / (4 * np.pi * sc.epsilon_0 * sc.m_e * sc.c**2)
    tau = 2 * r_e / (3 * sc.c)
    w = 2 * np.pi * sc.c / lam
    got = {"omega": d.omega, "tau": d.tau, "Gamma": d.Gamma, "sin_alpha": np.sin(d.phase_alpha),
           "delta_omega": d.delta_omega}
    indep = {"omega": w, "tau": tau, "Gamma": tau * w * w, "sin_alpha": tau * w, "delta_omega": 0.5 * tau**2 * w**3}
    worst = max(max(abs(got[k] / EXAMPLE_500NM[k] - 1), abs(got[k] / indep[k] - 1)) for k in got)
    checks = [
        ("norm drift", drift < NORM_DRIFT_MAX, f"{drift:.1e} over {N_CYCLES} cycles"),
        ("effective drive zero at w=1/2", zero_cross, "sign flips across 1/2"),
        ("closure", closure < CLOSURE_RTOL, f"max {closure:.1e} relative, {tr.t.size} steps"),
        ("dipole identities", identities, "Gamma = tau w^2, dw = tau^2 w^3 / 2 exactly"),
        ("500 nm example", worst < EXAMPLE_RTOL and d.regime_ok,
         f"Gamma={d.Gamma:.4g}/s, tau={d.tau:.4g} s, worst rel {worst:.1e}"),
    ]
    assert _verdict(10, "Bloch and dipole decay", checks)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
