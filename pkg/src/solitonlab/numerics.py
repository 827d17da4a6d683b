"""Shared numerical kernels.

Radial grids, adaptive initial-value integration with blow-up reporting,
bracketed and two-dimensional root finding, radial quadrature and the
physical constants used for unit conversions.

The integrator is a thin driver around :class:`scipy.integrate.DOP853`
that steps manually so that a diverging shot can be stopped early and
returned with its partial trace instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import constants as _sc
from scipy import integrate as _si
from scipy import optimize as _so

__all__ = [
    "RadialGrid",
    "RadialProfile",
    "PhysicalConstants",
    "SolveReport",
    "IVPResult",
    "integrate_ivp",
    "find_root",
    "bisect_sign",
    "radial_integral",
    "WEIGHTS",
]


# ---------------------------------------------------------------------------
# grids and profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial sample points plus an integration direction.

    Parameters
    ----------
    points : array_like
        Radial coordinates, strictly increasing, at least two of them.
    direction : {"inward", "outward"}
        Order in which an integrator walks the points. Inward grids are
        traversed from ``points[-1]`` down to ``points[0]`` and must not
        contain the origin.
    """

    points: np.ndarray
    direction: str = "outward"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a radial grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if self.direction not in ("inward", "outward"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.direction == "inward" and pts[0] <= 0.0:
            raise ValueError("inward grids must stop at rho_min > 0")
        object.__setattr__(self, "points", pts)

    @classmethod
    def linear(cls, start, stop, n, direction="outward"):
        return cls(np.linspace(start, stop, int(n)), direction)

    @classmethod
    def geometric(cls, start, stop, n, direction="inward"):
        """Log-spaced grid, the natural choice for profiles with 1/rho tails."""
        return cls(np.geomspace(start, stop, int(n)), direction)

    @property
    def size(self):
        return self.points.size

    @property
    def rho_min(self):
        return float(self.points[0])

    @property
    def rho_max(self):
        return float(self.points[-1])

    def ordered(self):
        """Points in integration order."""
        return self.points[::-1] if self.direction == "inward" else self.points


@dataclass
class RadialProfile:
    """A sampled function of the radial coordinate."""

    rho: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.rho.shape != self.values.shape:
            raise ValueError("rho and values must have the same shape")


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhysicalConstants:
    """Electron-scale constants in SI units, energies in eV.

    Parameters
    ----------
    fine_structure : float
        alpha_fs, dimensionless.
    compton_length : float
        Reduced Compton wavelength hbar/(m_e c) in metres.
    classical_electron_radius : float
        r_e in metres; must equal ``fine_structure * compton_length``.
    critical_field : float
        Classical field e/(4 pi eps0 r_e^2) in V/m.
    electron_rest_energy : float
        m_e c^2 in eV.
    speed_of_light : float
        c in m/s; needed for time scales such as the radiation-reaction time.

    Notes
    -----
    Values are inputs rather than module constants so tests can pin them.
    Use :meth:`codata` for the values bundled with scipy.
    """

    fine_structure: float
    compton_length: float
    classical_electron_radius: float
    critical_field: float
    electron_rest_energy: float
    speed_of_light: float = 299792458.0
    rtol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        vals = (
            self.fine_structure,
            self.compton_length,
            self.classical_electron_radius,
            self.critical_field,
            self.electron_rest_energy,
            self.speed_of_light,
        )
        if not all(np.isfinite(v) and v > 0 for v in vals):
            raise ValueError("physical constants must be finite and positive")
        expected = self.fine_structure * self.compton_length
        if abs(self.classical_electron_radius - expected) > self.rtol * expected:
            raise ValueError(
                "classical_electron_radius must equal fine_structure*compton_length "
                f"(got {self.classical_electron_radius!r}, expected {expected!r})"
            )

    @classmethod
    def codata(cls):
        """Constants from :mod:`scipy.constants` (CODATA 2018 in scipy 1.x)."""
        pc = _sc.physical_constants
        alpha = pc["fine-structure constant"][0]
        lam = pc["reduced Compton wavelength"][0]
        mec2_ev = pc["electron mass energy equivalent in MeV"][0] * 1e6
        # r_e from alpha*lambda_C keeps the invariant at round-off level
        r_e = alpha * lam
        return cls(
            fine_structure=alpha,
            compton_length=lam,
            classical_electron_radius=r_e,
            critical_field=mec2_ev / r_e,
            electron_rest_energy=mec2_ev,
            speed_of_light=_sc.c,
        )

    @property
    def coulomb_volts_metre(self):
        """e/(4 pi eps0) in V*m, i.e. alpha * m_e c^2[eV] * lambda_C."""
        return self.fine_structure * self.electron_rest_energy * self.compton_length


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class SolveReport:
    """Outcome of an iterative solve.

    ``converged`` implies ``final_residual <= tolerance``.
    """

    converged: bool
    iterations: int
    final_residual: float
    tolerance: float = 0.0
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if self.final_residual < 0 or np.isnan(self.final_residual):
            self.final_residual = float("inf") if np.isnan(self.final_residual) else abs(self.final_residual)
        if self.converged and self.final_residual > self.tolerance:
            self.converged = False
            self.diagnostics.append("residual above tolerance; marked non-converged")

    def note(self, msg):
        self.diagnostics.append(str(msg))
        return self


# ---------------------------------------------------------------------------
# initial value problems
# ---------------------------------------------------------------------------


class _NonFinite(Exception):
    pass


@dataclass
class IVPResult:
    """State trace on a grid, possibly truncated by a blow-up.

    Attributes
    ----------
    rho : ndarray
        Grid points (increasing, as stored on the grid).
    y : ndarray, shape (n_points, n_state)
        Interpolated state; NaN at points the integration never reached.
    status : str
        ``"success"``, ``"blowup"``, ``"nonfinite"``, ``"underflow"`` or
        ``"stalled"`` (step budget exhausted).
    stop_rho : float
        Radius of the last accepted state.
    stop_state : ndarray
        Last accepted state; its signs are the shooting diagnostic.
    """

    rho: np.ndarray
    y: np.ndarray
    status: str
    stop_rho: float
    stop_state: np.ndarray
    n_steps: int = 0
    nfev: int = 0
    message: str = ""

    @property
    def ok(self):
        return self.status == "success"

    @property
    def reached(self):
        return np.all(np.isfinite(self.y), axis=1)


def integrate_ivp(
    rhs: Callable,
    y0: Sequence[float],
    grid: RadialGrid,
    tol: float = 1e-10,
    *,
    atol: float | None = None,
    blowup: float = 1e12,
    max_step: float = np.inf,
    log_radius: bool = False,
    method: str = "DOP853",
    max_steps: int = 50_000,
) -> IVPResult:
    """Integrate ``y' = rhs(rho, y)`` across ``grid`` in its stated direction.

    Parameters
    ----------
    rhs : callable
        ``rhs(rho, y) -> dy/drho``.
    y0 : array_like
        State at the first point of ``grid.ordered()``.
    grid : RadialGrid
        Output points; the trace is aligned with ``grid.points``.
    tol : float
        Relative tolerance of the embedded pair.
    atol : float, optional
        Absolute tolerance; defaults to ``tol * 1e-3``.
    blowup : float
        Stop as soon as any component exceeds this magnitude.
    max_step : float
        Largest step in the integration variable.
    log_radius : bool
        Integrate in ``s = ln(rho)``; useful when the grid spans decades.
    method : {"DOP853", "RK45"}
        Embedded Runge-Kutta pair from scipy.
    max_steps : int
        Step budget; a stiff or near-singular trajectory stops as ``"stalled"``.

    Returns
    -------
    IVPResult
        Non-success statuses carry the partial trace and the last state.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if atol is None:
        atol = tol * 1e-3
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")
    solver_cls = {"DOP853": _si.DOP853, "RK45": _si.RK45}[method]

    pts = grid.ordered()
    if log_radius:
        if pts.min() <= 0:
            raise ValueError("log_radius needs rho > 0 on the whole grid")
        tpts = np.log(pts)

        def fun(s, y):
            r = np.exp(s)
            d = r * np.asarray(rhs(r, y), dtype=float)
            if not np.all(np.isfinite(d)):
                raise _NonFinite
            return d

        to_rho = np.exp
    else:
        tpts = pts

        def fun(s, y):
            d = np.asarray(rhs(s, y), dtype=float)
            if not np.all(np.isfinite(d)):
                raise _NonFinite
            return d

        def to_rho(s):
            return s

    n = pts.size
    out = np.full((n, y0.size), np.nan)
    out[0] = y0
    status, message = "success", ""
    t_last, y_last = tpts[0], y0.copy()
    n_steps = 0
    try:
        solver = solver_cls(fun, tpts[0], y0, tpts[-1], rtol=tol, atol=atol, max_step=max_step)
        nxt = 1
        while nxt < n:
            msg = solver.step()
            if solver.status == "failed":
                status, message = "underflow", str(msg)
                break
            n_steps += 1
            t_new = solver.t
            sgn = np.sign(tpts[-1] - tpts[0])
            j = nxt
            while j < n and sgn * (tpts[j] - t_new) <= 0:
                j += 1
            if j > nxt:
                dense = solver.dense_output()
                out[nxt:j] = dense(tpts[nxt:j]).T
                nxt = j
            t_last, y_last = t_new, solver.y.copy()
            if not np.all(np.isfinite(y_last)):
                status, message = "nonfinite", "state became non-finite"
                break
            if np.max(np.abs(y_last)) > blowup:
                status, message = "blowup", f"|y| exceeded {blowup:g}"
                break
            if n_steps >= max_steps and solver.status != "finished":
                status, message = "stalled", f"no convergence within {max_steps} steps"
                break
            if solver.status == "finished":
                if nxt < n:
                    out[nxt:] = solver.y
                    nxt = n
                break
    except _NonFinite:
        status, message = "nonfinite", "rhs returned a non-finite value"
    nfev = solver.nfev if "solver" in locals() else 0

    order = slice(None, None, -1) if grid.direction == "inward" else slice(None)
    trace = out[order]
    # points past the stopping radius are unreached, never extrapolated
    if status != "success":
        stop_r = to_rho(t_last)
        bad = grid.points < stop_r if grid.direction == "inward" else grid.points > stop_r
        trace[bad] = np.nan
    return IVPResult(
        rho=grid.points,
        y=trace,
        status=status,
        stop_rho=float(to_rho(t_last)),
        stop_state=y_last,
        n_steps=n_steps,
        nfev=nfev,
        message=message,
    )


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------


def bisect_sign(classify: Callable[[float], int], lo: float, hi: float, xtol: float = 1e-12, max_iter: int = 200):
    """Bisection on a sign-valued classifier.

    ``classify(x)`` returns a nonzero sign; the two ends must disagree.
    Used when the objective is a discrete outcome (node or no node) rather
    than a continuous residual. The report's residual is the final bracket
    width and its tolerance is ``xtol``.
    """
    s_lo, s_hi = np.sign(classify(lo)), np.sign(classify(hi))
    if s_lo == 0 or s_hi == 0 or s_lo == s_hi:
        raise ValueError("no sign change over the bracket")
    it = 0
    while hi - lo > xtol and it < max_iter:
        mid = 0.5 * (lo + hi)
        s = np.sign(classify(mid))
        if s == s_lo:
            lo = mid
        else:
            hi = mid
        it += 1
    width = hi - lo
    rep = SolveReport(width <= xtol, it, width, xtol)
    return 0.5 * (lo + hi), rep


def _fd_jacobian(f, x, fx, step):
    n = x.size
    J = np.empty((fx.size, n))
    for i in range(n):
        h = step[i]
        xp = x.copy()
        xp[i] += h
        J[:, i] = (np.asarray(f(xp), dtype=float) - fx) / h
    return J


def find_root(
    f: Callable,
    bracket_or_seed,
    tol: float = 1e-10,
    *,
    max_iter: int = 100,
    xtol: float = 0.0,
    jac_step=None,
    kind: str | None = None,
):
    """Root of a scalar function on a bracket or of a 2-vector map from a seed.

    Parameters
    ----------
    f : callable
        Scalar function of a float, or map from an array to an array.
    bracket_or_seed : sequence
        ``(lo, hi)`` with a sign change for the scalar case; a seed vector
        for the vector case. Unless ``kind`` is given, a length-2 input whose
        first entry maps to a scalar is treated as a bracket.
    tol : float
        Required ``|f(root)|``, componentwise.
    max_iter : int
        Iteration cap; the best iterate is returned when it is hit.
    xtol : float
        Scalar case only: also stop once the bracket is narrower than this.
    jac_step : float or sequence, optional
        Finite-difference steps for the initial Jacobian (vector case).
    kind : {"scalar", "vector"}, optional
        Skip the shape probe and force one of the two cases.

    Returns
    -------
    root : float or ndarray
    report : SolveReport

    Raises
    ------
    ValueError
        Scalar case without a sign change over the bracket, or a non-finite
        value at the seed.
    """
    arr = np.asarray(bracket_or_seed, dtype=float)
    if kind is None:
        kind = "vector"
        if arr.shape == (2,):
            try:
                if np.ndim(f(float(arr[0]))) == 0:
                    kind = "scalar"
            except (TypeError, IndexError, ValueError):
                pass
    if kind == "scalar":
        return _find_root_scalar(f, float(arr[0]), float(arr[1]), tol, max_iter, xtol)
    if kind == "vector":
        return _find_root_vector(f, arr, tol, max_iter, jac_step)
    raise ValueError(f"unknown kind {kind!r}")


def _find_root_scalar(f, lo, hi, tol, max_iter, xtol):
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo, SolveReport(True, 0, 0.0, tol)
    if fhi == 0.0:
        return hi, SolveReport(True, 0, 0.0, tol)
    if np.sign(flo) == np.sign(fhi):
        raise ValueError(f"no sign change over [{lo}, {hi}]")
    # Brent's method from scipy with a residual check of our own; it never
    # leaves the bracket, so it inherits the bisection guarantee.
    try:
        x, res = _so.brentq(f, lo, hi, xtol=max(xtol, 1e-300), rtol=4 * np.finfo(float).eps,
                            maxiter=max_iter, full_output=True, disp=False)
        it = res.iterations
    except RuntimeError:
        x, it = 0.5 * (lo + hi), max_iter
    r = abs(float(f(x)))
    rep = SolveReport(r <= tol, it, r, tol)
    if not rep.converged and xtol > 0:
        rep.note("bracket reached xtol before the residual reached tol")
    return float(x), rep


def _find_root_vector(f, x0, tol, max_iter, jac_step):
    x = np.array(x0, dtype=float)
    fx = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ValueError("map is not finite at the seed")
    if jac_step is None:
        step = 1e-7 * np.maximum(np.abs(x), 1.0)
    else:
        step = np.broadcast_to(np.asarray(jac_step, dtype=float), x.shape).copy()
    J = _fd_jacobian(f, x, fx, step)
    notes = []
    fresh = True
    it = 0
    while np.max(np.abs(fx)) > tol and it < max_iter:
        it += 1
        try:
            dx = -np.linalg.solve(J, fx)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(J, fx, rcond=None)[0]
        norm0 = np.linalg.norm(fx)
        lam, accepted = 1.0, False
        while lam >= 1.0 / 256:
            xn = x + lam * dx
            fn = np.asarray(f(xn), dtype=float)
            if np.all(np.isfinite(fn)) and np.linalg.norm(fn) < (1 - 1e-4 * lam) * norm0:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if fresh:
                notes.append(f"line search failed at iteration {it}")
                break
            # stale Broyden model: rebuild the Jacobian and retry
            J = _fd_jacobian(f, x, fx, step)
            fresh = True
            continue
        s = xn - x
        J = J + np.outer(fn - fx - J @ s, s) / (s @ s)
        x, fx = xn, fn
        fresh = False
    r = float(np.max(np.abs(fx)))
    rep = SolveReport(r <= tol, it, r, tol, notes)
    if it >= max_iter and r > tol:
        rep.note("iteration cap reached; best iterate returned")
    return x, rep


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

WEIGHTS = {
    "1": lambda r: np.ones_like(r),
    "4pi rho^2": lambda r: 4.0 * np.pi * r**2,
    "4pi rho^3": lambda r: 4.0 * np.pi * r**3,
}


def radial_integral(profile, weight="4pi rho^2", values=None):
    """Composite-trapezoid integral of ``profile * weight`` over its grid.

    Parameters
    ----------
    profile : RadialProfile or array_like
        A profile, or the radial grid when ``values`` is given.
    weight : {"4pi rho^2", "4pi rho^3", "1"}
        Volume weight for charges and energies, spin weight, or none.
    values : array_like, optional
        Samples when ``profile`` is a bare grid.

    Returns
    -------
    float
    """
    if values is None:
        rho, vals = profile.rho, profile.values
    else:
        rho, vals = np.asarray(profile, dtype=float), np.asarray(values, dtype=float)
    if rho.size < 2:
        raise ValueError("radial_integral needs at least 2 grid points")
    try:
        w = WEIGHTS[weight]
    except KeyError:
        raise ValueError(f"unknown weight {weight!r}; choose from {sorted(WEIGHTS)}") from None
    return float(np.trapezoid(vals * w(rho), rho))
