"""Self-field Dirac-Poisson soliton by inward shooting.

Dimensionless radial system (rho = r / lambda_C, s = sign(eE)) for kappa = -1::

    g' = (1 + b) f
    f' = (2 / rho) f + (1 - b) g
    V'' = -(2 / rho) V' - s (f^2 + g^2)
    b = beta - s (alpha / 2) V

For kappa = +1 the centrifugal term moves to the upper component,
``g' = (2 / rho) g + (1 + b) f`` and ``f' = (1 - b) g``, so both parities keep
a regular origin. Shots start at ``rho_max`` from the decaying far field
``f = A exp(-k rho) / rho``, ``V = B / rho`` and run inward to ``rho_min``.

The Klein-Gordon companion uses the potential-dependent charge density
``(|beta| - s alpha V) g1^2`` and is used to show that no regular
self-bound profile exists for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import (
    PhysicalConstants,
    RadialGrid,
    SolveReport,
    find_root,
    integrate_ivp,
    radial_integral,
)

__all__ = [
    "SPIN_TARGET",
    "DiracParams",
    "DiracState",
    "DiracTolerances",
    "DiracObservables",
    "DiracSolution",
    "Shot",
    "FeasibilityReport",
    "dirac_rhs",
    "kg_rhs",
    "far_field_seed",
    "shoot_from_infinity",
    "match_potential",
    "match_amplitudes",
    "solve_fixed",
    "observables",
    "ode_residual",
    "similarity_transform",
    "solve_soliton",
    "constraint_values",
    "kg_effective_potential_demo",
    "kg_companion_scan",
]

SPIN_TARGET = 0.375


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiracParams:
    """Eigenparameters and integration span of one shot.

    Parameters
    ----------
    kappa : {-1, +1}
    alpha : float
        Coupling in the Dirac pair (enters as alpha/2 times V).
    beta : float
        |E| / m c^2, strictly inside (0, 1).
    sign_eE : {-1, +1}
        Sign of e*E; -1 for the electron.
    rho_max, rho_min : float
        Start and stop radii of the inward integration.
    """

    kappa: int = -1
    alpha: float = 0.101
    beta: float = 0.35
    sign_eE: int = -1
    rho_max: float = 30.0
    rho_min: float = 1e-4

    def __post_init__(self):
        if self.kappa not in (-1, 1):
            raise ValueError("kappa must be -1 or +1")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not self.alpha >= 0.0:
            raise ValueError("alpha must be non-negative")
        if self.sign_eE not in (-1, 1):
            raise ValueError("sign_eE must be -1 or +1")
        if not 0.0 < self.rho_min < self.rho_max:
            raise ValueError("need 0 < rho_min < rho_max")

    @property
    def k(self):
        """Far-field decay rate sqrt(1 - beta^2)."""
        return float(np.sqrt(1.0 - self.beta**2))

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class DiracState:
    """Radial functions on a grid (or a single point)."""

    g_hat: np.ndarray
    f_hat: np.ndarray
    v_hat: np.ndarray
    dv_hat: np.ndarray

    @classmethod
    def from_array(cls, y):
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            return cls(*y)
        return cls(y[:, 0], y[:, 1], y[:, 2], y[:, 3])

    def as_array(self):
        return np.stack([np.asarray(self.g_hat), np.asarray(self.f_hat),
                         np.asarray(self.v_hat), np.asarray(self.dv_hat)], axis=-1)

    def scaled(self, wave, potential):
        return DiracState(self.g_hat * wave, self.f_hat * wave,
                          self.v_hat * potential, self.dv_hat * potential)


@dataclass(frozen=True)
class DiracTolerances:
    """Tolerances of the nested solve.

    ivp : relative tolerance of each shot
    inner : residual of the (A, B) spin/regularity solve
    outer : residual of the constraint roots in beta and alpha
    origin : regularity threshold, relative to the profile maximum
    residual : acceptance level for the re-inserted ODE residual
    """

    ivp: float = 1e-10
    inner: float = 1e-10
    outer: float = 1e-9
    origin: float = 1e-3
    residual: float = 1e-6
    n_points: int = 3000


@dataclass
class DiracObservables:
    """Integral observables of a radial profile.

    ``spin`` is the magnitude of the spin integral; the displayed sign
    convention of the radial pair makes the signed integral negative for
    the nodeless state, which is kept in ``spin_signed``.
    """

    spin: float
    spin_signed: float
    charge_integral: float
    alpha_out: float
    m_g: float
    m_f: float
    m_fg: float
    F_d: float
    V_d: float
    total_mass: float

    def as_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}


@dataclass
class Shot:
    """One inward integration and its origin diagnostics."""

    params: DiracParams
    A: float
    B: float
    rho: np.ndarray
    trace: DiracState
    status: str
    stop_rho: float
    origin: dict
    system: str = "dirac"

    @property
    def diverged(self):
        return self.status != "success"


@dataclass
class DiracSolution:
    """Converged (or best) profile with its eigenparameters and integrals."""

    params: DiracParams
    amplitudes: tuple
    rho: np.ndarray
    trace: DiracState
    observables: DiracObservables
    report: SolveReport
    constraints: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def _unpack(state):
    if isinstance(state, DiracState):
        return state.g_hat, state.f_hat, state.v_hat, state.dv_hat
    g, f, v, dv = state
    return g, f, v, dv


def dirac_rhs(rho, state, params: DiracParams):
    """Derivatives (g', f', V', V'') of the dimensionless Dirac-Poisson system.

    Parameters
    ----------
    rho : float or ndarray
        Radius, must be positive.
    state : DiracState or sequence
        (g, f, V, V').
    params : DiracParams

    Returns
    -------
    ndarray
        Stacked derivatives along the first axis.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("dirac_rhs needs rho > 0")
    g, f, v, dv = _unpack(state)
    s = params.sign_eE
    b = params.beta - s * 0.5 * params.alpha * v
    if params.kappa == -1:
        dg = (1.0 + b) * f
        df = 2.0 / rho * f + (1.0 - b) * g
    else:
        dg = 2.0 / rho * g + (1.0 + b) * f
        df = (1.0 - b) * g
    d2v = -2.0 / rho * dv - s * (f * f + g * g)
    return np.array([dg, df, dv, d2v])


def kg_rhs(rho, state, params: DiracParams):
    """Derivatives (g1', f1', V', V'') of the Klein-Gordon companion system.

    ``g1`` is the scalar radial wave and ``f1 = g1'``; the charge density
    carries the factor ``|beta| - s alpha V``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("kg_rhs needs rho > 0")
    g, f, v, dv = _unpack(state)
    s = params.sign_eE
    beta = abs(params.beta)
    dg = f
    df = -2.0 / rho * f + (1.0 - (beta - s * 0.5 * params.alpha * v) ** 2) * g
    d2v = -2.0 / rho * dv - s * (beta - s * params.alpha * v) * g * g
    return np.array([dg, df, dv, d2v])


_RHS = {"dirac": dirac_rhs, "kg": kg_rhs}


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


def far_field_seed(params: DiracParams, A, B, system="dirac"):
    """State at ``rho_max`` from the decaying asymptotics."""
    R, k, beta = params.rho_max, params.k, params.beta
    if system == "dirac":
        f = A * np.exp(-k * R) / R
        # decaying eigenvector of the constant-coefficient limit
        g = -(1.0 + beta) / k * f
    elif system == "kg":
        g = A * np.exp(-k * R) / R
        f = -(k + 1.0 / R) * g
    else:
        raise ValueError(f"unknown system {system!r}")
    return np.array([g, f, B / R, -B / R**2])


def _grid(params, n_points):
    return RadialGrid.geometric(params.rho_min, params.rho_max, n_points, "inward")


def shoot_from_infinity(params: DiracParams, A, B, *, system="dirac", tol=1e-10, n_points=3000):
    """Integrate inward from the far field with amplitudes (A, B).

    Returns
    -------
    Shot
        ``origin`` holds the values at the stopping radius, the signed
        Gauss residual ``rho^2 V'`` normalised by the enclosed source,
        the singular-mode measure of the upper component, and which
        component diverged first with its sign.
    """
    rhs = _RHS[system]
    y0 = far_field_seed(params, A, B, system)
    grid = _grid(params, n_points)
    scale = max(np.max(np.abs(y0[:2])) * np.exp(params.k * params.rho_max), abs(B) / params.rho_min, 1.0)
    # a regular shot needs ~1e2 steps; the budget cuts off stiff blow-ups
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = integrate_ivp(lambda r, y: rhs(r, y, params), y0, grid, tol,
                            atol=tol * 1e-6 * max(abs(y0[0]), abs(y0[1]), abs(y0[2]) * 1e-3, 1e-300),
                            blowup=1e6 * scale, log_radius=True, max_steps=5000)
        trace = DiracState.from_array(res.y)
        origin = _origin_diagnostics(params, res, trace, system)
    return Shot(params, float(A), float(B), grid.points, trace, res.status, res.stop_rho, origin, system)


def _origin_diagnostics(params, res, trace, system):
    rho = res.rho
    ok = np.isfinite(trace.g_hat)
    g, f, v, dv = res.stop_state
    r0 = res.stop_rho
    s = params.sign_eE
    if system == "dirac":
        n = trace.f_hat**2 + trace.g_hat**2
    else:
        n = (abs(params.beta) - s * params.alpha * trace.v_hat) * trace.g_hat**2
    # charge enclosed between the stop radius and rho_max, Gauss-consistent
    enclosed = s * np.trapezoid(np.where(ok, n * rho**2, 0.0), rho)
    gauss = (r0 * r0 * dv) / max(abs(enclosed), abs(params.rho_max**2 * trace.dv_hat[-1]), 1e-300)
    upper = np.where(ok, np.abs(rho * trace.g_hat), 0.0)
    peak_g = np.max(np.where(ok, np.abs(trace.g_hat), 0.0))
    peak_f = np.max(np.where(ok, np.abs(trace.f_hat), 0.0))
    singular = r0 * g / max(np.max(upper), 1e-300)
    d = _RHS[system](r0, res.stop_state, params)
    if system == "dirac" and params.kappa == 1:
        small, peak_small, d_large, peak_large = g, peak_g, d[1], peak_f
    else:
        small, peak_small, d_large, peak_large = f, peak_f, d[0], peak_g
    peaks = np.max(np.where(np.isfinite(res.y), np.abs(res.y), 0.0), axis=0)
    comps = np.abs(res.stop_state) / np.maximum(peaks, 1e-300)
    which = ["g", "f", "V", "dV"][int(np.argmax(np.abs(res.stop_state) * (comps >= 0.999)))]
    return {
        "rho": r0,
        "g": float(g),
        "f": float(f),
        "V": float(v),
        "dV": float(dv),
        "gauss": float(gauss),
        "singular": float(singular),
        # the component carrying the centrifugal term must vanish at the origin
        # and the other must flatten: f and rho g' for kappa=-1, swapped for +1
        "small_rel": float(abs(small) / max(peak_small, 1e-300)),
        "rho_dlarge_rel": float(abs(r0 * d_large) / max(peak_large, 1e-300)),
        "sign_f": int(np.sign(f)),
        "sign_g": int(np.sign(g)),
        "diverged": res.status != "success",
        "diverged_component": which if res.status != "success" else "",
        "enclosed": float(enclosed),
    }


def match_potential(params: DiracParams, A, B0=None, *, system="dirac", tol=1e-12, n_points=3000, ivp_tol=1e-10):
    """Potential amplitude B that removes the 1/rho mode of V at fixed A.

    Gauss's law makes ``rho_min^2 V'(rho_min) = -B + s * int n rho^2``, so a
    fixed-point pass on the enclosed source gives a close seed that the
    secant refinement then polishes. When the enclosed source depends
    strongly on B (the secant diverges or stalls), a sign change of the
    Gauss residual is bracketed on a ladder of multiples of the first
    enclosed source and refined with Brent's method.
    """
    def gauss(B):
        sh = shoot_from_infinity(params, A, B, system=system, tol=ivp_tol, n_points=n_points)
        return sh.origin["gauss"], sh

    B = float(B0) if B0 is not None else 0.0
    scale = np.nan
    for _ in range(3):
        sh = shoot_from_infinity(params, A, B, system=system, tol=ivp_tol, n_points=n_points)
        B_new = sh.origin["enclosed"]
        if not np.isfinite(B_new):
            break
        if not np.isfinite(scale):
            scale = B_new
        if abs(B_new - B) <= 1e-13 * max(abs(B_new), 1e-300):
            B = B_new
            break
        B = B_new
    # secant polish on the normalised Gauss residual
    r_prev, _ = gauss(B)
    if np.isfinite(r_prev):
        if abs(r_prev) <= tol:
            return B, SolveReport(True, 1, abs(r_prev), tol)
        B_prev, B = B, B * (1 + 1e-6) + 1e-12
        r = r_prev
        for it in range(1, 30):
            r, sh = gauss(B)
            if abs(r) <= tol or not np.isfinite(r):
                break
            denom = r - r_prev
            if denom == 0:
                break
            B_next = B - r * (B - B_prev) / denom
            if not np.isfinite(B_next):
                break
            B_prev, B, r_prev = B, B_next, r
        if np.isfinite(r) and abs(r) <= tol:
            return float(B), SolveReport(True, it, float(abs(r)), tol)
    return _bracket_potential(gauss, scale, tol)


def _bracket_potential(gauss, scale, tol):
    if not (np.isfinite(scale) and scale != 0):
        return np.nan, SolveReport(False, 0, np.inf, tol, ["no finite enclosed source to set the scale"])
    ladder = scale * np.array([0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 3.0, 5.0, 8.0])
    vals = np.array([gauss(B)[0] for B in ladder])
    for i in range(ladder.size - 1):
        lo, hi = vals[i], vals[i + 1]
        if np.isfinite(lo) and np.isfinite(hi) and np.sign(lo) != np.sign(hi):
            try:
                B, rep = find_root(lambda x: gauss(x)[0], (ladder[i], ladder[i + 1]), tol,
                                   xtol=1e-14 * abs(scale), kind="scalar")
            except ValueError:
                continue
            return float(B), rep
    return np.nan, SolveReport(False, ladder.size, float(np.nanmin(np.abs(vals))) if np.any(np.isfinite(vals)) else np.inf,
                               tol, ["Gauss residual has no sign change on the potential ladder"])


def _spin_and_gauss(params, logA, B, tol, n_points, spin_target):
    sh = shoot_from_infinity(params, np.exp(logA), B, tol=tol, n_points=n_points)
    if sh.diverged:
        return np.array([np.nan, np.nan]), sh
    J = abs(radial_integral(sh.rho, "4pi rho^3", sh.trace.f_hat * sh.trace.g_hat))
    return np.array([np.log(J / spin_target), sh.origin["gauss"]]), sh


def match_amplitudes(params: DiracParams, seed=None, *, spin_target=SPIN_TARGET, tol=1e-10,
                     ivp_tol=1e-10, n_points=3000):
    """Solve for (A, B) giving spin ``spin_target`` and a regular origin.

    Two-vector Broyden iteration on ``(ln A, B)`` with residuals
    ``ln(J / J_target)`` and the normalised Gauss residual.

    Returns
    -------
    A, B : float
    shot : Shot
    report : SolveReport
    """
    A0, B0 = (1.0, None) if seed is None else seed
    # re-match the potential at the seed amplitude, then use the
    # weak-coupling scaling J ~ A^2, B ~ A^2 to land near the spin target
    for _ in range(2):
        B0, _ = match_potential(params, A0, B0, n_points=n_points, ivp_tol=ivp_tol, tol=1e-8)
        res, _ = _spin_and_gauss(params, np.log(A0), B0, ivp_tol, n_points, spin_target)
        if not np.all(np.isfinite(res)):
            raise ValueError("seed shot diverged after matching the potential")
        fac = np.exp(-0.5 * res[0])
        A0, B0 = A0 * fac, B0 * fac * fac
        if abs(res[0]) < 1e-3:
            break
    A_seed, B_seed = A0, B0

    def F(x):
        r, _ = _spin_and_gauss(params, x[0], x[1], ivp_tol, n_points, spin_target)
        return r

    x, rep = find_root(F, np.array([np.log(A_seed), B_seed]), tol, max_iter=60,
                       jac_step=[1e-6, 1e-6 * max(abs(B_seed), 1e-8)], kind="vector")
    _, sh = _spin_and_gauss(params, x[0], x[1], ivp_tol, n_points, spin_target)
    return float(np.exp(x[0])), float(x[1]), sh, rep


# ---------------------------------------------------------------------------
# observables, residual, similarity
# ---------------------------------------------------------------------------


def _observables_from(params, rho, tr, B):
    g, f, v, dv = tr.g_hat, tr.f_hat, tr.v_hat, tr.dv_hat
    if not np.all(np.isfinite(g)):
        raise ValueError("observables need a complete trace")
    d = dirac_rhs(rho, tr, params)
    spin_signed = radial_integral(rho, "4pi rho^3", f * g)
    m_g = radial_integral(rho, "4pi rho^2", g * g)
    m_f = radial_integral(rho, "4pi rho^2", f * f)
    m_fg = radial_integral(rho, "4pi rho^2", -g * d[1] + f * d[0] + 2.0 * params.kappa / rho * g * f)
    Q = m_g + m_f
    # field energy with the exterior B/rho tail added analytically
    F_d = params.alpha * (np.trapezoid(rho**2 * dv**2, rho) + B * B / rho[-1])
    V_d = params.alpha * abs(np.trapezoid(rho**2 * v * (f * f + g * g), rho))
    return DiracObservables(
        spin=abs(spin_signed),
        spin_signed=spin_signed,
        charge_integral=Q,
        alpha_out=params.alpha * Q * Q,
        m_g=m_g,
        m_f=m_f,
        m_fg=m_fg,
        F_d=F_d,
        V_d=V_d,
        total_mass=m_g + m_f + m_fg + F_d,
    )


def observables(solution):
    """Spin, charge, alpha_out and mass decomposition of a solution or shot."""
    if isinstance(solution, Shot):
        return _observables_from(solution.params, solution.rho, solution.trace, solution.B)
    return _observables_from(solution.params, solution.rho, solution.trace, solution.amplitudes[1])


def ode_residual(solution, trim=5):
    """Largest relative mismatch between the trace's derivative and the rhs.

    The trace is splined in ``ln(rho)``; for each component the interior
    mismatch is divided by the largest magnitude of that component's rhs,
    which makes the measure invariant under the similarity transform.
    """
    rho = solution.rho
    params = solution.params
    y = solution.trace.as_array()
    s = np.log(rho)
    rhs = dirac_rhs(rho, solution.trace, params)
    out = 0.0
    sl = slice(trim, -trim)
    for c in range(4):
        dy = CubicSpline(s, y[:, c])(s, 1) / rho
        scale = np.max(np.abs(rhs[c]))
        if scale == 0.0:
            continue
        out = max(out, float(np.max(np.abs(dy[sl] - rhs[c][sl])) / scale))
    return out


def similarity_transform(solution: DiracSolution, tau):
    """Map a solution to coupling ``tau * alpha``.

    The potential is divided by ``tau`` and both spinor components by
    ``sqrt(tau)``; the grid is unchanged and the integrals are recomputed.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    p = solution.params.with_(alpha=solution.params.alpha * tau)
    tr = solution.trace.scaled(1.0 / np.sqrt(tau), 1.0 / tau)
    A, B = solution.amplitudes
    amps = (A / np.sqrt(tau), B / tau)
    obs = _observables_from(p, solution.rho, tr, amps[1])
    rep = SolveReport(solution.report.converged, solution.report.iterations,
                      solution.report.final_residual, solution.report.tolerance,
                      list(solution.report.diagnostics) + [f"similarity transform tau={tau!r}"])
    return DiracSolution(p, amps, solution.rho, tr, obs, rep, dict(solution.constraints), {})


# ---------------------------------------------------------------------------
# nested solve
# ---------------------------------------------------------------------------


def solve_fixed(params: DiracParams, tolerances: DiracTolerances | None = None, seed=None):
    """Spin-normalised, origin-regular profile at fixed (alpha, beta)."""
    tol = tolerances or DiracTolerances()
    try:
        A, B, sh, rep = match_amplitudes(params, seed, tol=tol.inner, ivp_tol=tol.ivp, n_points=tol.n_points)
    except ValueError:
        if seed is None:
            raise
        A, B, sh, rep = match_amplitudes(params, None, tol=tol.inner, ivp_tol=tol.ivp, n_points=tol.n_points)
    if sh.diverged:
        rep.converged = False
        rep.note(f"final shot diverged at rho={sh.stop_rho:.3g}")
        return DiracSolution(params, (A, B), sh.rho, sh.trace, None, rep)
    obs = _observables_from(params, sh.rho, sh.trace, B)
    sol = DiracSolution(params, (A, B), sh.rho, sh.trace, obs, rep)
    o = sh.origin
    sol.constraints["origin_small_rel"] = o["small_rel"]
    sol.constraints["origin_rho_dlarge_rel"] = o["rho_dlarge_rel"]
    if max(o["small_rel"], o["rho_dlarge_rel"]) > tol.origin:
        rep.converged = False
        rep.note("origin values exceed the regularity threshold")
    return sol


def constraint_values(sol: DiracSolution, alpha_fs):
    """(spin - 3/8, alpha*Q^2 - alpha_fs, Mass - beta) of a fixed-parameter solution."""
    o = sol.observables
    return (o.spin - SPIN_TARGET, o.alpha_out - alpha_fs, o.total_mass - sol.params.beta)


class _Cache:
    """Memoised fixed-parameter solves with warm starts from the nearest key."""

    def __init__(self, base, tol):
        self.base, self.tol, self.store = base, tol, {}

    def __call__(self, alpha, beta):
        key = (round(alpha, 14), round(beta, 14))
        if key in self.store:
            return self.store[key]
        seed = None
        if self.store:
            near = min(self.store, key=lambda k: abs(np.log(k[0] / alpha)) + abs(k[1] - beta))
            prev = self.store[near]
            if prev.report.converged:
                # similarity scaling as a warm start only; the solve re-runs
                tau = alpha / near[0]
                seed = (prev.amplitudes[0] / np.sqrt(tau), prev.amplitudes[1] / tau)
        sol = solve_fixed(self.base.with_(alpha=alpha, beta=beta), self.tol, seed)
        if not sol.report.converged and seed is not None:
            sol = solve_fixed(self.base.with_(alpha=alpha, beta=beta), self.tol, None)
        self.store[key] = sol
        return sol


def solve_soliton(kappa=-1, tolerances: DiracTolerances | None = None, *, constants: PhysicalConstants | None = None,
                  sign_eE=-1, alpha_bracket=(0.01, 0.3), beta_bracket=(0.05, 0.95), n_scan=7,
                  rho_max=30.0, rho_min=1e-4, max_iter=30):
    """Find (alpha, beta) satisfying the spin, charge and mass constraints.

    (A, B) is solved innermost for spin 3/8 and a regular origin. A coarse
    beta scan at a reference alpha locates the sign change of
    ``Mass - beta``; the charge then fixes a seed alpha through
    ``alpha = alpha_fs / Q^2``. A Broyden iteration on (ln alpha, beta)
    drives the mass and charge residuals to zero together.

    Parameters
    ----------
    kappa : {-1, +1}
    tolerances : DiracTolerances, optional
    constants : PhysicalConstants, optional
        Supplies the measured alpha_fs; CODATA values by default.
    alpha_bracket, beta_bracket : tuple
        Scan brackets for the two outer constraints.
    n_scan : int
        Points of the coarse beta scan.

    Returns
    -------
    DiracSolution
        ``constraints`` holds the three constraint residuals and the
        origin diagnostics; ``scan`` records the coarse sign-change
        evidence for each constraint. A non-converged report comes back
        with the best iterate rather than raising.
    """
    tol = tolerances or DiracTolerances()
    consts = constants or PhysicalConstants.codata()
    afs = consts.fine_structure
    mid_alpha = float(np.sqrt(alpha_bracket[0] * alpha_bracket[1]))
    base = DiracParams(kappa=kappa, sign_eE=sign_eE, rho_max=rho_max, rho_min=rho_min,
                       alpha=mid_alpha, beta=0.5 * sum(beta_bracket))
    solve = _Cache(base, tol)
    notes = []

    def mass_residual(alpha, beta):
        sol = solve(alpha, beta)
        if sol.observables is None:
            return np.nan
        return sol.observables.total_mass - beta

    def charge_residual(alpha, beta):
        sol = solve(alpha, beta)
        if sol.observables is None:
            return np.nan
        return sol.observables.alpha_out - afs

    # coarse scan: evidence that every constraint crosses zero, and a seed
    betas = np.linspace(*beta_bracket, n_scan)
    mass_scan = np.array([mass_residual(mid_alpha, b) for b in betas])
    ok = np.isfinite(mass_scan)
    flips = np.nonzero(ok[:-1] & ok[1:] & (np.sign(mass_scan[1:]) != np.sign(mass_scan[:-1])))[0]
    if flips.size:
        i = int(flips[0])
        m0, m1 = mass_scan[i], mass_scan[i + 1]
        beta0 = float(betas[i] - m0 * (betas[i + 1] - betas[i]) / (m1 - m0))
    else:
        notes.append("mass constraint has no sign change over the beta bracket")
        beta0 = float(betas[np.nanargmin(np.abs(mass_scan))])
    charge_scan = [charge_residual(a, beta0) for a in alpha_bracket]
    ref = solve(mid_alpha, beta0)
    spin_scan = _spin_crossing(ref.params, ref.amplitudes, tol)
    scan = {
        "beta_grid": betas.tolist(),
        "mass_minus_beta": [float(m) for m in mass_scan],
        "mass_alpha": mid_alpha,
        "alpha_ends": list(alpha_bracket),
        "charge_beta": beta0,
        "charge_minus_target": [float(c) for c in charge_scan],
        "spin_A_grid": spin_scan[0],
        "spin_minus_target": spin_scan[1],
        "crossings": {
            "spin": _has_crossing(spin_scan[1]),
            "charge": _has_crossing(charge_scan),
            "mass": _has_crossing(mass_scan),
        },
    }
    if not scan["crossings"]["charge"]:
        notes.append("charge constraint does not cross zero over the alpha bracket")
    Q0 = ref.observables.charge_integral
    alpha0 = float(np.clip(afs / Q0**2, *alpha_bracket))

    def F(x):
        alpha, beta = float(np.exp(x[0])), float(x[1])
        return np.array([mass_residual(alpha, beta), charge_residual(alpha, beta) / afs])

    try:
        x, rep = find_root(F, np.array([np.log(alpha0), beta0]), tol.outer, max_iter=max_iter,
                           jac_step=(1e-4, 1e-4), kind="vector")
        alpha, beta = float(np.exp(x[0])), float(x[1])
    except ValueError as exc:
        notes.append(f"outer iteration failed: {exc}")
        alpha, beta = alpha0, beta0
        rep = SolveReport(False, 0, np.inf, tol.outer, [])
    sol = solve(alpha, beta)
    if sol.observables is None:
        sol.report.converged = False
        sol.report.diagnostics.extend(notes)
        sol.scan = scan
        return sol
    cvals = constraint_values(sol, afs)
    sol.constraints.update({"spin": cvals[0], "charge": cvals[1], "mass": cvals[2],
                            "ode_residual": ode_residual(sol)})
    sol.scan = scan
    final = max(abs(cvals[1]), abs(cvals[2]))
    converged = sol.report.converged and rep.converged
    diag = list(sol.report.diagnostics) + notes + [
        f"outer iterations: {rep.iterations}", f"fixed-parameter solves: {len(solve.store)}"]
    sol.report = SolveReport(converged, rep.iterations, final, tol.outer, diag)
    return sol


def _has_crossing(vals):
    v = np.asarray(vals, dtype=float)
    v = v[np.isfinite(v)]
    return bool(v.size >= 2 and (np.any(v == 0) or np.any(np.sign(v[1:]) != np.sign(v[:-1]))))


def _spin_crossing(params, amps, tol, factors=(0.5, 0.8, 1.25, 2.0)):
    """Spin minus target along A at the matched potential: a crossing at A*."""
    A_star, B_star = amps
    grid, vals = [], []
    for fac in factors:
        A = A_star * fac
        B, _ = match_potential(params, A, B_star * fac * fac, tol=1e-10, n_points=tol.n_points, ivp_tol=tol.ivp)
        J = np.nan
        if np.isfinite(B):
            sh = shoot_from_infinity(params, A, B, tol=tol.ivp, n_points=tol.n_points)
            if not sh.diverged:
                J = abs(radial_integral(sh.rho, "4pi rho^3", sh.trace.f_hat * sh.trace.g_hat))
        grid.append(float(A))
        vals.append(float(J - SPIN_TARGET))
    return grid, vals


# ---------------------------------------------------------------------------
# Klein-Gordon obstruction
# ---------------------------------------------------------------------------


def kg_effective_potential_demo(E=0.5, rho=None, m=1.0, norm=1.49):
    """Effective energies seen by a constant wave in a 1/rho potential.

    Returns a dict of equal-length arrays: ``rho``, ``V``, ``E``,
    ``dirac`` = m^2 - (E - V)^2, ``kg`` = m^2 - sign(E - V) (E - V)^2 and
    ``charge`` = -(E - V) / norm.
    """
    if rho is None:
        rho = np.linspace(0.05, 5.0, 100)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise ValueError("grid must exclude rho = 0")
    V = 1.0 / rho
    d = E - V
    return {
        "rho": rho,
        "V": V,
        "E": np.full_like(rho, E),
        "dirac": m * m - d * d,
        "kg": m * m - np.sign(d) * d * d,
        "charge": -d / norm,
    }


@dataclass
class FeasibilityReport:
    """Outcome of an amplitude scan for an origin-regular bound profile.

    For every A on the scan the potential amplitude B*(A) that removes
    the 1/rho mode of V is found; ``wave`` is then the signed singular
    mode ``rho_min * g(rho_min)`` relative to ``max |rho g|``. A regular
    profile exists where it vanishes (below ``tol``) or changes sign
    between two completed shots.
    """

    system: str
    params: DiracParams
    A: np.ndarray
    B: np.ndarray
    wave: np.ndarray
    completed: np.ndarray
    found: bool
    sign_change: bool
    tol: float
    notes: list = field(default_factory=list)


def kg_companion_scan(params: DiracParams, A_bracket=(1e-3, 1e2), n_A=21, *, system="kg", tol=1e-3,
                      n_points=2000, ivp_tol=1e-9):
    """Scan amplitudes for a regular self-bound profile of ``system``.

    Parameters
    ----------
    params : DiracParams
        Coupling and energy; ``kappa`` is ignored for the KG system.
    A_bracket : tuple
        Log-spaced wave-amplitude range.
    system : {"kg", "dirac"}
        The Dirac run is the control case.
    tol : float
        Regularity threshold on the relative singular mode.
    """
    As = np.geomspace(*A_bracket, n_A)
    Bs, waves, done = [], [], []
    notes = []
    B_prev = None
    for A in As:
        B, rep = match_potential(params, A, B_prev, system=system, tol=1e-10, n_points=n_points, ivp_tol=ivp_tol)
        ok, w = False, np.nan
        if np.isfinite(B):
            sh = shoot_from_infinity(params, A, B, system=system, tol=ivp_tol, n_points=n_points)
            ok = (not sh.diverged) and rep.converged
            w = sh.origin["singular"] if ok else np.nan
        Bs.append(B)
        waves.append(w)
        done.append(ok)
        if ok:
            B_prev = B
    Bs, waves, done = np.array(Bs), np.array(waves), np.array(done)
    w = waves[done]
    small = bool(np.any(np.abs(w) < tol))
    flips = bool(w.size >= 2 and np.any(np.sign(w[1:]) != np.sign(w[:-1])))
    if not np.all(done):
        notes.append(f"{int(np.sum(~done))} of {n_A} amplitudes had no regular potential or diverged")
    return FeasibilityReport(system, params, As, Bs, waves, done, small or flips, flips, tol, notes)
