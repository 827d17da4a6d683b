"""Nonlinear Klein-Gordon photon solitons and Uehling-potential ODEs.

The dimensionless radial equation is

    E'' + (2/rho) E' = c E - E^3,

with ``c = 1`` for the full transverse equation, ``c = 0`` for the
pure-cubic large-amplitude limit and ``c = m`` (mass parameter) for the
longitudinal profiles. Fields are measured in ``E_b = E_cl/sqrt(2)`` and
lengths in ``r_b = r_e/sqrt(pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .numerics import (
    PhysicalConstants,
    RadialGrid,
    SolveReport,
    bisect_sign,
    integrate_ivp,
    radial_integral,
)

__all__ = [
    "FieldProfile",
    "PhotonUnits",
    "DispersionVariant",
    "SolitonEnergy",
    "series_coefficients",
    "small_r_series",
    "solve_transverse",
    "ground_state",
    "self_similar_scale",
    "soliton_energy",
    "cubic_family",
    "solve_longitudinal",
    "field_residual",
    "UehlingVacuum",
    "uehling_vacuum",
    "UehlingAsymptotics",
    "uehling_point_asymptotics",
    "external_dispersion",
]

EULER_GAMMA = float(np.euler_gamma)


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------


@dataclass
class FieldProfile:
    """Radial field profile ``E(rho)`` with its derivative.

    Attributes
    ----------
    grid : RadialGrid
        Outward grid starting at ``rho = 0``.
    E_tilde, dE_tilde : ndarray
        Field and radial derivative on the grid; NaN where not reached.
    geometry : {"transverse", "longitudinal"}
    amplitude : float
        Central value ``E(0)``.
    linear : float
        Coefficient of the linear term of the equation.
    outcome : str
        ``"complete"``, ``"node"`` (crossed zero), ``"turn"`` (E' = 0 while
        E > 0), ``"truncated"`` (cut at the first node) or ``"patched"``
        (exponential tail attached).
    event_rho : float
        Radius of the node or turning point, NaN if none.
    """

    grid: RadialGrid
    E_tilde: np.ndarray
    dE_tilde: np.ndarray
    geometry: str = "transverse"
    amplitude: float = 0.0
    linear: float = 1.0
    outcome: str = "complete"
    event_rho: float = float("nan")
    notes: list = field(default_factory=list)

    @property
    def rho(self):
        return self.grid.points

    def effective_charge(self):
        """Divergence of a radial field, ``(2/rho) E + E'``; infinite at the origin."""
        with np.errstate(divide="ignore", invalid="ignore"):
            q = 2.0 * self.E_tilde / self.rho + self.dE_tilde
        return np.where(self.rho > 0, q, np.inf * np.sign(self.amplitude or 1.0))


@dataclass(frozen=True)
class PhotonUnits:
    """Field, length and energy units of the dimensionless photon equation.

    Attributes
    ----------
    E_b : float
        Field unit in V/m, ``E_cl / sqrt(2)``.
    r_b : float
        Length unit in m, ``r_e / sqrt(pi)``.
    eps_b : float
        Energy unit ``E_b^2 r_b^3`` in eV (Gaussian energy of a field
        ``E`` filling ``r^3``), i.e. ``4 pi eps0 E_b^2 r_b^3``.
    eps_b_mec2 : float
        ``eps_b`` in units of the electron rest energy.
    constants : PhysicalConstants
    """

    E_b: float
    r_b: float
    eps_b: float
    eps_b_mec2: float
    constants: PhysicalConstants

    @classmethod
    def from_constants(cls, constants: PhysicalConstants | None = None):
        c = constants or PhysicalConstants.codata()
        E_b = c.critical_field / np.sqrt(2.0)
        r_b = c.classical_electron_radius / np.sqrt(np.pi)
        eps_b = E_b**2 * r_b**3 / c.coulomb_volts_metre
        return cls(E_b, r_b, eps_b, eps_b / c.electron_rest_energy, c)

    @property
    def radius_re(self):
        """Length unit in classical electron radii."""
        return self.r_b / self.constants.classical_electron_radius

    @property
    def field_Ecl(self):
        """Field unit in units of the critical field."""
        return self.E_b / self.constants.critical_field


@dataclass(frozen=True)
class DispersionVariant:
    """External-field dispersion: Proca mass term and nonlinear share.

    ``mass_term`` is the coefficient of the linear ``-beta E_e`` term;
    ``nonlinearity_share`` is the fraction of the quartic term moved into
    the external equation. Both zero gives the massless wave equation.
    """

    mass_term: float = 0.0
    nonlinearity_share: float = 0.0

    def __post_init__(self):
        if self.mass_term < 0:
            raise ValueError("mass_term must be >= 0")
        if not 0.0 <= self.nonlinearity_share <= 1.0:
            raise ValueError("nonlinearity_share must lie in [0, 1]")


@dataclass
class SolitonEnergy:
    """Energy content, 90%-energy radius and central field of a profile."""

    energy_tilde: float
    radius_tilde: float
    energy_mec2: float
    radius_re: float
    central_field_Ecl: float
    tail_fraction: float
    amplitude: float


# ---------------------------------------------------------------------------
# series and ODE
# ---------------------------------------------------------------------------


def series_coefficients(a, linear=0.0):
    """Even power-series coefficients ``(a, c2, c4, c6)`` of the regular solution.

    Substituting ``E = a + c2 r^2 + c4 r^4 + c6 r^6`` into
    ``E'' + 2E'/r = c E - E^3`` and matching powers.
    """
    c = float(linear)
    c2 = (c * a - a**3) / 6.0
    c4 = (c - 3.0 * a * a) * c2 / 20.0
    c6 = ((c - 3.0 * a * a) * c4 - 3.0 * a * c2 * c2) / 42.0
    return a, c2, c4, c6


def small_r_series(a, rho):
    """Fourth-order small-radius series of the pure-cubic equation.

    Returns
    -------
    E, dE : float or ndarray
        ``a - (a^3/6) r^2 + (a^5/40) r^4`` and its derivative
        ``-(a^3/3) r + (a^5/10) r^3``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be >= 0")
    E = a - a**3 / 6.0 * rho**2 + a**5 / 40.0 * rho**4
    dE = -(a**3) / 3.0 * rho + a**5 / 10.0 * rho**3
    if E.ndim == 0:
        return float(E), float(dE)
    return E, dE


def _series_full(a, linear, rho):
    a0, c2, c4, c6 = series_coefficients(a, linear)
    E = a0 + c2 * rho**2 + c4 * rho**4 + c6 * rho**6
    dE = 2 * c2 * rho + 4 * c4 * rho**3 + 6 * c6 * rho**5
    return E, dE


def _rhs(linear):
    def f(rho, y):
        E, dE = y
        return (dE, linear * E - E**3 - 2.0 * dE / rho)

    return f


def _default_grid(rho_max=30.0, n_points=6001):
    return RadialGrid.linear(0.0, rho_max, n_points)


def solve_transverse(a, include_linear=True, grid: RadialGrid | None = None, *, linear=None, tol=1e-12,
                     geometry="transverse", stop_at_event=False):
    """Integrate the regular solution with central amplitude ``a`` outward.

    Parameters
    ----------
    a : float
        Central amplitude, ``a >= 0``.
    include_linear : bool
        Keep the linear term (``c = 1``); otherwise solve the pure-cubic equation.
    grid : RadialGrid, optional
        Outward grid starting at 0; default ``[0, 30]`` with 6001 points.
    linear : float, optional
        Explicit linear coefficient; overrides ``include_linear``.
    tol : float
        Integrator tolerance.
    stop_at_event : bool
        Blank out the trace past the first node or turning point.

    Returns
    -------
    FieldProfile
        ``outcome`` records whether the trace crossed zero (``"node"``)
        or turned back up while positive (``"turn"``), the shooting
        diagnostic for the decaying ground state.
    """
    if a < 0:
        raise ValueError("central amplitude must be >= 0")
    grid = grid or _default_grid()
    if grid.direction != "outward" or grid.points[0] != 0.0:
        raise ValueError("transverse profiles need an outward grid starting at rho = 0")
    c = float(linear) if linear is not None else (1.0 if include_linear else 0.0)
    rho = grid.points
    E = np.zeros_like(rho)
    dE = np.zeros_like(rho)
    if a == 0:
        return FieldProfile(grid, E, dE, geometry, 0.0, c, "complete")
    # series start well inside the radius where the sixth-order term matters
    r0 = min(1e-4 / max(a, np.sqrt(abs(c)), 1.0), 0.5 * rho[1])
    inner = rho <= r0
    E[inner], dE[inner] = _series_full(a, c, rho[inner])
    y0 = _series_full(a, c, r0)
    sub = RadialGrid(np.concatenate(([r0], rho[~inner])), "outward")
    res = integrate_ivp(_rhs(c), y0, sub, tol, atol=tol * 1e-3 * a, blowup=1e6 * max(a, 1.0))
    E[~inner], dE[~inner] = res.y[1:, 0], res.y[1:, 1]
    outcome, event = _classify(rho, E, dE)
    prof = FieldProfile(grid, E, dE, geometry, float(a), c, outcome, event)
    if res.status != "success":
        prof.notes.append(f"integration stopped at rho={res.stop_rho:.4g}: {res.message}")
    if stop_at_event and np.isfinite(event):
        cut = rho > event
        prof.E_tilde[cut] = np.nan
        prof.dE_tilde[cut] = np.nan
    return prof


def _classify(rho, E, dE):
    ok = np.isfinite(E)
    neg = np.nonzero(ok & (E < 0))[0]
    up = np.nonzero(ok & (dE > 0) & (E > 0) & (rho > 0))[0]
    i_neg = neg[0] if neg.size else None
    i_up = up[0] if up.size else None
    if i_neg is None and i_up is None:
        return "complete", float("nan")
    if i_up is None or (i_neg is not None and i_neg <= i_up):
        i = i_neg
        # linear interpolation of the crossing
        r = rho[i - 1] - E[i - 1] * (rho[i] - rho[i - 1]) / (E[i] - E[i - 1])
        return "node", float(r)
    return "turn", float(rho[i_up])


def _node_radius(prof: FieldProfile):
    """First zero of ``E``, refined on the Hermite interpolant."""
    rho, E, dE = prof.rho, prof.E_tilde, prof.dE_tilde
    neg = np.nonzero(np.isfinite(E) & (E < 0))[0]
    if not neg.size:
        raise ValueError("profile has no node on its grid")
    i = neg[0]
    h = CubicHermiteSpline(rho[i - 1:i + 1], E[i - 1:i + 1], dE[i - 1:i + 1])
    roots = [r for r in h.roots(extrapolate=False) if rho[i - 1] <= r <= rho[i]]
    return float(roots[0]), h


def ground_state(linear=1.0, bracket=(1.0, 10.0), grid: RadialGrid | None = None, *, xtol=1e-13, tol=1e-12,
                 tail_level=1e-6, geometry="transverse"):
    """Nodeless decaying ground state by bisection on the shooting outcome.

    Amplitudes above the matched value cross zero; amplitudes below it
    turn back up. The bisected profile is kept up to where it has decayed
    to ``tail_level * a`` and continued with the asymptotic tail
    ``C exp(-sqrt(c) rho)/rho``.

    Returns
    -------
    a_star : float
    profile : FieldProfile
    report : SolveReport
    """
    if linear <= 0:
        raise ValueError("a decaying ground state needs a positive linear coefficient")
    grid = grid or _default_grid()

    def classify(a):
        p = solve_transverse(a, grid=grid, linear=linear, tol=tol, geometry=geometry)
        return -1 if p.outcome == "node" else 1

    a_star, rep = bisect_sign(classify, *bracket, xtol=xtol)
    prof = solve_transverse(a_star, grid=grid, linear=linear, tol=tol, geometry=geometry)
    _patch_tail(prof, np.sqrt(linear), tail_level)
    rep.note(f"matched amplitude {a_star:.12g}")
    return a_star, prof, rep


def _patch_tail(prof: FieldProfile, k, tail_level):
    rho, E = prof.rho, prof.E_tilde
    first_bad = len(rho)
    if np.isfinite(prof.event_rho):
        first_bad = int(np.searchsorted(rho, prof.event_rho))
    good = np.arange(len(rho)) < first_bad
    small = np.nonzero(good & np.isfinite(E) & (np.abs(E) < tail_level * prof.amplitude) & (rho > 0))[0]
    if not small.size:
        prof.notes.append("tail never reached the patch level; profile left unpatched")
        return
    m = small[0]
    C = E[m] * rho[m] * np.exp(k * rho[m])
    r = rho[m:]
    prof.E_tilde[m:] = C * np.exp(-k * r) / r
    prof.dE_tilde[m:] = -C * np.exp(-k * r) * (k * r + 1.0) / r**2
    prof.outcome = "patched"
    prof.notes.append(f"asymptotic tail attached at rho={rho[m]:.4g}")


def field_residual(profile: FieldProfile, trim=3):
    """Relative residual of ``E'' + 2E'/rho - c E + E^3`` at interior points.

    ``E''`` comes from differentiating a cubic spline through the sampled
    derivative; the residual is normalised by the largest term magnitude.
    """
    rho, E, dE = profile.rho, profile.E_tilde, profile.dE_tilde
    ok = np.isfinite(E) & np.isfinite(dE) & (rho > 0)
    r, e, de = rho[ok], E[ok], dE[ok]
    if r.size < 2 * trim + 4:
        raise ValueError("profile has too few finite interior points")
    d2 = CubicSpline(r, de).derivative()(r)
    c = profile.linear
    terms = np.abs(np.vstack([d2, 2 * de / r, c * e, e**3]))
    res = d2 + 2 * de / r - c * e + e**3
    scale = np.max(terms[:, trim:-trim])
    return float(np.max(np.abs(res[trim:-trim])) / scale) if scale > 0 else 0.0


def self_similar_scale(profile: FieldProfile, alpha_scale):
    """Scale distances by ``alpha_scale`` and the field by ``1/alpha_scale``.

    The grid points are mapped with the profile, so no resampling error
    enters; for the pure-cubic equation the result is again an exact
    solution with amplitude ``a/alpha_scale``.
    """
    if not alpha_scale > 0:
        raise ValueError("alpha_scale must be positive")
    s = float(alpha_scale)
    grid = RadialGrid(profile.rho * s, profile.grid.direction)
    return replace(
        profile,
        grid=grid,
        E_tilde=profile.E_tilde / s,
        dE_tilde=profile.dE_tilde / s**2,
        amplitude=profile.amplitude / s,
        linear=profile.linear / s**2,
        event_rho=profile.event_rho * s,
        notes=list(profile.notes),
    )


def soliton_energy(profile: FieldProfile, units: PhotonUnits | None = None, *, radius_share=0.9,
                   max_tail=1e-4) -> SolitonEnergy:
    """Energy ``eps_b * int E^2/2 4 pi rho^2`` and the radius enclosing 90% of it.

    Raises
    ------
    ValueError
        If the profile does not decay at the grid edge: the energy density
        at the edge, carried over one more grid span, exceeds ``max_tail``
        of the total.
    """
    units = units or PhotonUnits.from_constants()
    ok = np.isfinite(profile.E_tilde)
    rho, E = profile.rho[ok], profile.E_tilde[ok]
    dens = 0.5 * E**2
    total = radial_integral(rho, "4pi rho^2", dens)
    if total == 0:
        return SolitonEnergy(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, float(profile.amplitude))
    edge = 4 * np.pi * rho[-1] ** 2 * dens[-1] * rho[-1]
    tail = float(edge / total)
    if tail > max_tail:
        raise ValueError(f"profile does not decay at the grid edge (tail fraction {tail:.3g})")
    w = 4 * np.pi * rho**2 * dens
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(rho))))
    r_share = float(np.interp(radius_share * cum[-1], cum, rho))
    return SolitonEnergy(
        energy_tilde=total,
        radius_tilde=r_share,
        energy_mec2=total * units.eps_b_mec2,
        radius_re=r_share * units.radius_re,
        central_field_Ecl=float(abs(E[0])) * units.field_Ecl,
        tail_fraction=tail,
        amplitude=float(profile.amplitude),
    )


def truncate_at_node(profile: FieldProfile):
    """Cut a profile at its first zero; the node itself becomes the last point."""
    r_node, _ = _node_radius(profile)
    keep = profile.rho < r_node
    rho = np.concatenate((profile.rho[keep], [r_node]))
    h = CubicHermiteSpline(profile.rho, np.nan_to_num(profile.E_tilde), np.nan_to_num(profile.dE_tilde))
    E = np.concatenate((profile.E_tilde[keep], [0.0]))
    dE = np.concatenate((profile.dE_tilde[keep], [float(h.derivative()(r_node))]))
    return replace(profile, grid=RadialGrid(rho, "outward"), E_tilde=E, dE_tilde=dE, outcome="truncated",
                   event_rho=r_node, notes=list(profile.notes))


def cubic_family(amplitudes, *, include_linear=False, n_points=4001, tol=1e-12, units: PhotonUnits | None = None):
    """Solve and truncate the regular profile for each amplitude independently.

    The grid of every member spans ``[0, 1.2 * xi_1 / a]``, where
    ``xi_1 = 6.8968...`` is the first node of the unit pure-cubic profile.

    Returns
    -------
    profiles : list of FieldProfile
    table : dict of ndarray
        Columns ``a``, ``radius_re``, ``energy_mec2``, ``central_field_Ecl``.
    """
    units = units or PhotonUnits.from_constants()
    profiles, rows = [], []
    for a in np.asarray(amplitudes, dtype=float):
        grid = RadialGrid.linear(0.0, 1.2 * 6.8968486 / a * (2.0 if include_linear else 1.0), n_points)
        p = truncate_at_node(solve_transverse(a, include_linear, grid, tol=tol))
        e = soliton_energy(p, units)
        profiles.append(p)
        rows.append((a, e.radius_re, e.energy_mec2, e.central_field_Ecl))
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    table = {k: arr[:, i] for i, k in enumerate(("a", "radius_re", "energy_mec2", "central_field_Ecl"))}
    return profiles, table


def solve_longitudinal(mass_param=1.0, grid: RadialGrid | None = None, *, bracket=None, xtol=1e-13, tol=1e-12):
    """Discrete radial-field profile for a given mass parameter.

    The same scalar radial equation is used with linear coefficient
    ``mass_param``; the centre condition ``E'(0) = 0`` is built into the
    series start, and the central amplitude is bisected for a nodeless
    decaying profile.

    Raises
    ------
    ValueError
        No profile in the amplitude bracket.
    """
    if mass_param <= 0:
        raise ValueError("mass_param must be positive")
    s = np.sqrt(mass_param)
    bracket = bracket or (0.5 * s, 10.0 * s)
    grid = grid or _default_grid(30.0 / s)
    try:
        a, prof, rep = ground_state(mass_param, bracket, grid, xtol=xtol * s, tol=tol, geometry="longitudinal")
    except ValueError as exc:
        raise ValueError(f"no longitudinal profile in amplitude bracket {bracket}") from exc
    return prof, rep


# ---------------------------------------------------------------------------
# Uehling potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UehlingVacuum:
    """Decaying vacuum solution ``V = c1 exp(-kappa r)/r`` with ``kappa^2 = alpha/(15 r_e^2)``.

    Radii are in metres unless ``r_unit`` rescales them.
    """

    c1: float
    kappa: float
    r_e: float
    alpha_fs: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.c1 * np.exp(-self.kappa * r) / r

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        return -self.c1 * np.exp(-self.kappa * r) * (self.kappa * r + 1.0) / r**2

    def second_derivative(self, r):
        r = np.asarray(r, dtype=float)
        k = self.kappa
        return self.c1 * np.exp(-k * r) * (k * k * r * r + 2 * k * r + 2.0) / r**3

    def residual(self, r):
        """Pointwise ``r_e^2 lap V - (alpha/15) V`` over its largest term."""
        r = np.asarray(r, dtype=float)
        V, d1, d2 = self(r), self.derivative(r), self.second_derivative(r)
        a = self.alpha_fs / 15.0
        terms = np.abs(np.vstack([self.r_e**2 * d2, self.r_e**2 * 2 * d1 / r, a * V]))
        res = self.r_e**2 * (d2 + 2 * d1 / r) - a * V
        scale = np.max(terms, axis=0)
        return np.where(scale > 0, np.abs(res) / np.where(scale > 0, scale, 1.0), 0.0)


def uehling_vacuum(c1, constants: PhysicalConstants | None = None):
    """Closed-form decaying vacuum potential and its residual checker."""
    c = constants or PhysicalConstants.codata()
    kappa = np.sqrt(c.fine_structure / 15.0) / c.classical_electron_radius
    return UehlingVacuum(float(c1), float(kappa), c.classical_electron_radius, c.fine_structure)


@dataclass
class UehlingAsymptotics:
    """Point-charge potential in volts from the two asymptotic branches."""

    r: np.ndarray
    V: np.ndarray
    branch: np.ndarray
    correction: np.ndarray
    crossover: float
    jump: float


def _near(x, alpha):
    return (2 * alpha / (3 * np.pi)) * (np.log(1.0 / x) - 5.0 / 6.0 - EULER_GAMMA)


def _far(x, alpha):
    return alpha / (4 * np.sqrt(np.pi)) * np.exp(-2.0 * x) / x**1.5


def uehling_point_asymptotics(r, Z=1, constants: PhysicalConstants | None = None):
    """Vacuum-polarised Coulomb potential of a point charge ``Z e``.

    ``V = -Z (e/4 pi eps0)/r [1 + delta(x)]`` with ``x = r/lambda_C``; the
    logarithmic correction is used for ``x < 1`` and the exponentially
    screened one for ``x >= 1``. ``jump`` is the relative mismatch of the
    two brackets at the crossover.
    """
    c = constants or PhysicalConstants.codata()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be positive")
    lam, al = c.compton_length, c.fine_structure
    x = r / lam
    near = x < 1.0
    corr = np.where(near, _near(np.where(near, x, 1.0), al), _far(np.where(near, 1.0, x), al))
    V = -Z * c.coulomb_volts_metre / r * (1.0 + corr)
    jump = abs((1 + _near(1.0, al)) - (1 + _far(1.0, al))) / (1 + _far(1.0, al))
    branch = np.where(near, "near", "far")
    return UehlingAsymptotics(r, V, branch, corr, lam, float(jump))


def external_dispersion(k, variant: DispersionVariant = DispersionVariant(), c=1.0, invariant=0.0):
    """Frequency of a plane wave of the external field equation.

    ``omega^2 = c^2 (k^2 + beta - gamma I)`` with ``I = E^2 - c^2 B^2`` the
    field invariant, which is zero for a free plane wave.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be >= 0")
    w2 = c * c * (k * k + variant.mass_term - variant.nonlinearity_share * invariant)
    if np.any(w2 < 0):
        raise ValueError("evanescent: omega^2 < 0")
    w = np.sqrt(w2)
    return float(w) if w.ndim == 0 else w
