"""Guidance-law trajectories for closed-form wavefunctions.

Units: hbar = m = c = 1 unless a law or field says otherwise. Points are
arrays of shape ``(..., d)``; field evaluators return complex arrays of
shape ``(...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "NodalPointError",
    "TurningPointError",
    "ComplexField",
    "GuidanceLaw",
    "Trajectory",
    "TwoBodyField",
    "quantum_potential",
    "guidance_velocity",
    "poynting_velocity",
    "integrate_trajectory",
    "integrate_ensemble",
    "integrate_pair",
    "plane_wave",
    "standing_wave",
    "gaussian_packet",
    "gaussian_bohm_oracle",
    "DoubleSlit",
    "double_slit_field",
    "product_state",
    "relative_state",
    "two_mode_state",
    "entangled_pair_velocity",
    "EquivarianceResult",
    "equivariance_check",
    "fringe_minima",
    "depletion_centres",
    "sample_born",
]


class NodalPointError(ValueError):
    """The wavefunction magnitude is below the nodal threshold."""


class TurningPointError(ValueError):
    """Klein-Gordon guidance denominator vanishes."""


def _pts(x):
    x = np.asarray(x, dtype=float)
    return x[None] if x.ndim == 1 else x


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexField:
    """Closed-form complex wavefunction ``psi(x, t)``.

    Parameters
    ----------
    psi : callable
        ``psi(x, t)`` with ``x`` of shape ``(..., dim)``.
    dim : int
        Number of spatial coordinates.
    grad : callable, optional
        Analytic gradient, shape ``(..., dim)``; centred differences otherwise.
    dt : callable, optional
        Analytic time derivative; centred differences otherwise.
    h : float
        Finite-difference step.
    scale : float, optional
        Global maximum of ``|psi|`` used for the nodal threshold.
    propagation_axis : int, optional
        For stationary beams: the coordinate that parametrises streamlines.
    """

    psi: Callable
    dim: int = 1
    grad: Callable | None = None
    dt: Callable | None = None
    h: float = 1e-5
    scale: float | None = None
    propagation_axis: int | None = None

    def __call__(self, x, t=0.0):
        return self.psi(np.asarray(x, dtype=float), t)

    def amplitude(self, x, t=0.0):
        return np.abs(self(x, t))

    def phase(self, x, t=0.0):
        return np.angle(self(x, t))

    def fd_gradient(self, x, t=0.0, h=None):
        h = self.h if h is None else h
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=complex)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            out[..., j] = (self.psi(x + e, t) - self.psi(x - e, t)) / (2 * h)
        return out

    def gradient(self, x, t=0.0):
        if self.grad is not None:
            return self.grad(np.asarray(x, dtype=float), t)
        return self.fd_gradient(x, t)

    def time_derivative(self, x, t=0.0):
        if self.dt is not None:
            return self.dt(np.asarray(x, dtype=float), t)
        h = self.h
        return (self.psi(np.asarray(x, dtype=float), t + h) - self.psi(np.asarray(x, dtype=float), t - h)) / (2 * h)


@dataclass(frozen=True)
class GuidanceLaw:
    """Velocity rule from the phase of the guiding wave.

    Variants
    --------
    schrodinger
        ``v = (hbar/m) grad(phi)``.
    klein_gordon
        ``v = -c^2 (grad(phi) + (e/c) A) / (d(phi)/dt - e V)``.
    photon_phase
        ``v = (c^2/omega) grad(phi)``.
    poynting
        Energy velocity ``S/U`` of a vector potential; see :func:`poynting_velocity`.
    """

    variant: str = "schrodinger"
    mass: float = 1.0
    hbar: float = 1.0
    charge: float = 0.0
    c: float = 1.0
    omega: float = 1.0
    V: Callable | None = None
    A: Callable | None = None
    turning_eps: float = 1e-12

    def __post_init__(self):
        if self.variant not in ("schrodinger", "klein_gordon", "photon_phase", "poynting"):
            raise ValueError(f"unknown guidance variant {self.variant!r}")

    def velocity(self, grad_phase, dphase_dt, x, t):
        if self.variant == "schrodinger":
            return self.hbar / self.mass * grad_phase
        if self.variant == "photon_phase":
            return self.c**2 / self.omega * grad_phase
        if self.variant == "klein_gordon":
            V = self.V(x, t) if self.V is not None else 0.0
            A = self.A(x, t) if self.A is not None else 0.0
            den = dphase_dt - self.charge * V
            if np.any(np.abs(den) < self.turning_eps):
                raise TurningPointError("d(phi)/dt - eV vanishes: turning point")
            return -self.c**2 * (grad_phase + self.charge / self.c * A) / np.asarray(den)[..., None]
        raise ValueError("the poynting variant needs a vector potential; use poynting_velocity")


@dataclass
class Trajectory:
    """Time-stamped positions.

    ``positions`` has shape ``(n, dim)``, or ``(n, 2, dim)`` for a pair.
    ``status`` is ``"ok"`` or ``"node"`` (halted near a node).
    """

    times: np.ndarray
    positions: np.ndarray
    status: str = "ok"
    message: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if len(self.positions) != len(self.times):
            raise ValueError("one position per time stamp")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("trajectory positions must be finite")


@dataclass(frozen=True)
class TwoBodyField:
    """Configuration-space wavefunction ``Psi(r1, r2, t)``."""

    psi: Callable
    dim: int = 1
    grad1: Callable | None = None
    grad2: Callable | None = None
    h: float = 1e-5
    scale: float | None = None

    def __call__(self, r1, r2, t=0.0):
        return self.psi(np.asarray(r1, dtype=float), np.asarray(r2, dtype=float), t)

    def _fd(self, r1, r2, t, which):
        r1, r2 = np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
        out = np.empty((r1 if which == 1 else r2).shape, dtype=complex)
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = self.h
            if which == 1:
                out[..., j] = (self.psi(r1 + e, r2, t) - self.psi(r1 - e, r2, t)) / (2 * self.h)
            else:
                out[..., j] = (self.psi(r1, r2 + e, t) - self.psi(r1, r2 - e, t)) / (2 * self.h)
        return out

    def gradient(self, r1, r2, t=0.0, which=1):
        g = self.grad1 if which == 1 else self.grad2
        if g is not None:
            return g(np.asarray(r1, dtype=float), np.asarray(r2, dtype=float), t)
        return self._fd(r1, r2, t, which)

    def time_derivative(self, r1, r2, t=0.0):
        h = self.h
        return (self.psi(r1, r2, t + h) - self.psi(r1, r2, t - h)) / (2 * h)


# ---------------------------------------------------------------------------
# quantum potential and velocities
# ---------------------------------------------------------------------------


def quantum_potential(R, m=1.0, point=None, *, hbar=1.0, laplacian=None, h=1e-4, node_tol=1e-12):
    """``Q = -hbar^2/(2m) lap(R)/R`` at ``point``.

    Parameters
    ----------
    R : callable
        Real amplitude ``R(x)`` for ``x`` of shape ``(..., d)``.
    laplacian : callable, optional
        Analytic Laplacian; otherwise second-order centred differences.

    Raises
    ------
    NodalPointError
        ``|R(point)| <= node_tol``.
    """
    x = np.asarray(point, dtype=float)
    r = np.asarray(R(x), dtype=float)
    if np.any(np.abs(r) <= node_tol):
        raise NodalPointError("quantum potential is singular at a node of R")
    if laplacian is not None:
        lap = np.asarray(laplacian(x), dtype=float)
    else:
        d = x.shape[-1]
        lap = np.zeros_like(r)
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            lap = lap + (R(x + e) - 2 * r + R(x - e)) / (h * h)
    return -hbar**2 / (2 * m) * lap / r


def guidance_velocity(field_: ComplexField, law: GuidanceLaw, point, t=0.0, *, threshold=None):
    """Velocity of the guidance law at ``point``.

    Raises
    ------
    NodalPointError
        ``|psi| <= threshold`` (default ``1e-8`` of ``field.scale``).
    TurningPointError
        Klein-Gordon denominator vanishes.
    """
    x = np.asarray(point, dtype=float)
    psi = field_(x, t)
    thr = threshold if threshold is not None else (1e-8 * field_.scale if field_.scale else 0.0)
    if np.any(np.abs(psi) <= thr) or np.any(psi == 0):
        raise NodalPointError("guidance velocity undefined at a node")
    gphase = np.imag(field_.gradient(x, t) / psi[..., None])
    dphase = np.imag(field_.time_derivative(x, t) / psi) if law.variant == "klein_gordon" else None
    return law.velocity(gphase, dphase, x, t)


def poynting_velocity(A_field: Callable, point, t=0.0, *, omega=1.0, c=1.0, h=1e-5):
    """Energy velocity ``S/U`` of a transverse vector potential.

    ``v = (c^2/omega)(i/2)[(grad A*).A - (grad A).A* + curl(A* x A)] / (A*.A)``,
    which reduces to photon-phase guidance when the spin term vanishes.

    Parameters
    ----------
    A_field : callable
        ``A(x, t)`` returning complex vectors of shape ``(..., 3)``.

    Raises
    ------
    NodalPointError
        Zero field at the point.
    """
    x = np.asarray(point, dtype=float)
    A = A_field(x, t)
    U = np.real(np.sum(np.conj(A) * A, axis=-1))
    if np.any(U == 0):
        raise NodalPointError("Poynting velocity undefined where the field vanishes")
    grad = np.empty(A.shape[:-1] + (3,), dtype=complex)
    dcross = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        Ap, Am = A_field(x + e, t), A_field(x - e, t)
        dA = (Ap - Am) / (2 * h)
        # (grad A*).A - (grad A).A*, component j
        grad[..., j] = np.sum(np.conj(dA) * A - dA * np.conj(A), axis=-1)
        dcross.append((np.cross(np.conj(Ap), Ap) - np.cross(np.conj(Am), Am)) / (2 * h))
    curl = np.stack([
        dcross[1][..., 2] - dcross[2][..., 1],
        dcross[2][..., 0] - dcross[0][..., 2],
        dcross[0][..., 1] - dcross[1][..., 0],
    ], axis=-1)
    S = 0.5j * (grad + curl)
    return c**2 / omega * np.real(S) / U[..., None]


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _stamps(t_span, dt):
    if np.ndim(dt) == 0:
        t0, t1 = t_span
        n = max(int(np.ceil((t1 - t0) / dt - 1e-9)), 1)
        return np.linspace(t0, t1, n + 1)
    ts = np.asarray(dt, dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise ValueError("time stamps must be strictly increasing")
    return ts


def integrate_ensemble(field_: ComplexField, law: GuidanceLaw, X0, t_span, dt, *, threshold=1e-8):
    """Classical RK4 transport of many starting points at once.

    With ``field.propagation_axis`` set, the independent variable is that
    coordinate (streamlines of a stationary beam) and ``t_span``/``dt`` refer
    to it.

    Returns
    -------
    times : ndarray, shape (n_steps + 1,)
    X : ndarray, shape (n_steps + 1, n, dim)
    halted : ndarray of bool
        Members frozen because ``|psi|`` fell below ``threshold * scale``.
    """
    ts = _stamps(t_span, dt)
    X = np.array(_pts(X0), dtype=float)
    n = X.shape[0]
    axis = field_.propagation_axis
    scale = field_.scale if field_.scale is not None else float(np.max(np.abs(field_(X, ts[0] if axis is None else 0.0))))
    thr = threshold * scale
    halted = np.zeros(n, dtype=bool)
    out = np.empty((ts.size, n, X.shape[1]))
    out[0] = X

    def vel(x, t):
        if axis is None:
            return guidance_velocity(field_, law, x, t, threshold=0.0)
        # stationary beam: the clock is the stream coordinate, field time 0
        v = guidance_velocity(field_, law, x, 0.0, threshold=0.0)
        return v / v[..., axis][..., None]

    for i in range(ts.size - 1):
        t, h = ts[i], ts[i + 1] - ts[i]
        act = ~halted
        if not np.any(act):
            out[i + 1] = X
            continue
        x = X[act]
        if axis is not None:
            # the stream coordinate is the clock: keep it exactly on the stamps
            x[:, axis] = t
        k1 = vel(x, t)
        k2 = vel(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = vel(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = vel(x + h * k3, t + h)
        xn = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if axis is not None:
            xn[:, axis] = ts[i + 1]
        amp = np.abs(field_(xn, ts[i + 1] if axis is None else 0.0))
        bad = ~np.isfinite(xn).all(axis=1) | (amp < thr)
        idx = np.nonzero(act)[0]
        good_idx = idx[~bad]
        X[good_idx] = xn[~bad]
        halted[idx[bad]] = True
        out[i + 1] = X
    return ts, out, halted


def integrate_trajectory(field_: ComplexField, law: GuidanceLaw, x0, t_span, dt, *, threshold=1e-8):
    """RK4 trajectory of one starting point; halts before a node.

    Parameters
    ----------
    dt : float or array_like
        Fixed step, or the explicit increasing list of time stamps.

    Returns
    -------
    Trajectory
        ``status == "node"`` when ``|psi|`` dropped below ``threshold`` of
        the field scale; the trace then ends at the last safe point.
    """
    ts, X, halted = integrate_ensemble(field_, law, np.atleast_2d(np.asarray(x0, dtype=float)), t_span, dt,
                                       threshold=threshold)
    pos = X[:, 0, :]
    if halted[0]:
        # keep the stamps up to the last move
        moved = np.nonzero(np.any(np.diff(pos, axis=0) != 0, axis=1))[0]
        last = moved[-1] + 2 if moved.size else 1
        last = max(last, 2)
        return Trajectory(ts[:last], pos[:last], "node", "halted: |psi| below the nodal threshold")
    return Trajectory(ts, pos)


def integrate_pair(field_: TwoBodyField, law: GuidanceLaw, r1, r2, t_span, dt, *, threshold=1e-8):
    """RK4 integration of the joint configuration ``(r1, r2)`` with one clock."""
    ts = _stamps(t_span, dt)
    y = np.stack([np.atleast_1d(np.asarray(r1, dtype=float)), np.atleast_1d(np.asarray(r2, dtype=float))])
    scale = field_.scale if field_.scale is not None else abs(field_(y[0], y[1], ts[0]))
    out = [y.copy()]

    def f(y, t):
        v1, v2 = entangled_pair_velocity(field_, law, y[0], y[1], t, threshold=0.0)
        return np.stack([v1, v2])

    for i in range(ts.size - 1):
        t, h = ts[i], ts[i + 1] - ts[i]
        k1 = f(y, t)
        k2 = f(y + 0.5 * h * k1, t + 0.5 * h)
        k3 = f(y + 0.5 * h * k2, t + 0.5 * h)
        k4 = f(y + h * k3, t + h)
        yn = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(field_(yn[0], yn[1], ts[i + 1])) < threshold * scale:
            return Trajectory(ts[:i + 1], np.array(out), "node", "halted: |Psi| below the nodal threshold")
        y = yn
        out.append(y.copy())
    return Trajectory(ts, np.array(out))


# ---------------------------------------------------------------------------
# built-in single-particle fields
# ---------------------------------------------------------------------------


def plane_wave(k, omega=None, amplitude=1.0, *, mass=1.0, hbar=1.0):
    """``A exp(i(k.x - omega t))``; omega defaults to the free Schrodinger value."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    w = float(hbar * np.dot(k, k) / (2 * mass)) if omega is None else float(omega)

    def psi(x, t):
        return amplitude * np.exp(1j * (x @ k - w * t))

    def grad(x, t):
        return 1j * psi(x, t)[..., None] * k

    def dt(x, t):
        return -1j * w * psi(x, t)

    return ComplexField(psi, k.size, grad, dt, scale=abs(amplitude))


def standing_wave(k, omega=1.0):
    """``cos(k x) exp(-i omega t)`` in one dimension."""

    def psi(x, t):
        return np.cos(k * x[..., 0]) * np.exp(-1j * omega * t)

    def grad(x, t):
        return (-k * np.sin(k * x[..., 0]) * np.exp(-1j * omega * t))[..., None]

    return ComplexField(psi, 1, grad, scale=1.0)


def gaussian_packet(x0=0.0, k0=1.0, sigma0=1.0, *, mass=1.0, hbar=1.0):
    """Free Schrodinger Gaussian packet in one dimension.

    ``|psi|^2`` is normal with mean ``x0 + v t`` and width
    ``sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2)``.
    """
    v = hbar * k0 / mass
    w = hbar * k0 * k0 / (2 * mass)

    def parts(x, t):
        tau = hbar * t / (2 * mass * sigma0**2)
        s = 1.0 + 1j * tau
        xi = x[..., 0] - x0 - v * t
        psi = (2 * np.pi * sigma0**2) ** -0.25 / np.sqrt(s) * np.exp(
            -xi**2 / (4 * sigma0**2 * s) + 1j * k0 * (x[..., 0] - x0) - 1j * w * t)
        return psi, xi, s

    def psi(x, t):
        return parts(x, t)[0]

    def grad(x, t):
        p, xi, s = parts(x, t)
        return (p * (-xi / (2 * sigma0**2 * s) + 1j * k0))[..., None]

    scale = (2 * np.pi * sigma0**2) ** -0.25
    return ComplexField(psi, 1, grad, scale=scale)


def gaussian_bohm_oracle(x_start, t, x0=0.0, k0=1.0, sigma0=1.0, *, mass=1.0, hbar=1.0):
    """Exact Bohm trajectory through a free Gaussian packet."""
    v = hbar * k0 / mass
    sig = sigma0 * np.sqrt(1 + (hbar * np.asarray(t) / (2 * mass * sigma0**2)) ** 2)
    return x0 + v * np.asarray(t) + (x_start - x0) * sig / sigma0


@dataclass(frozen=True)
class DoubleSlit:
    """Geometry of the two-beam interference field (lengths in wavelengths)."""

    separation: float = 100.0
    width: float = 10.0
    wavelength: float = 1.0
    screen_distance: float = 1e4
    amplitude_b: float = 1.0
    drift: float = 0.0

    @property
    def k(self):
        return 2 * np.pi / self.wavelength

    @property
    def rayleigh(self):
        return 0.5 * self.k * self.width**2

    @property
    def fringe_spacing(self):
        """Far-field two-source spacing ``lambda D / d``."""
        return self.wavelength * self.screen_distance / self.separation

    def curvature_radius(self, z):
        z = np.asarray(z, dtype=float)
        return z + self.rayleigh**2 / z


def double_slit_field(separation=100.0, width=10.0, wavelength=1.0, screen_distance=1e4, *, amplitude_b=1.0,
                      drift=0.0):
    """Two paraxial Gaussian beams launched at ``x = +-d/2`` and ``z = 0``.

    Points are ``(x, z)``. Each beam is
    ``sqrt(q0/(z+q0)) exp(i k (x - x_j)^2 / (2 (z + q0))) exp(i(k z - omega t))``
    with ``q0 = -i z_R``; ``drift`` adds a linear-in-time phase to beam b.

    Returns
    -------
    field : ComplexField
        Stationary up to the global phase; ``propagation_axis = 1``.
    geometry : DoubleSlit
    """
    g = DoubleSlit(separation, width, wavelength, screen_distance, amplitude_b, drift)
    k, q0 = g.k, -1j * g.rayleigh
    xs = (0.5 * separation, -0.5 * separation)
    amps = (1.0, amplitude_b)
    norm = 1.0 / np.sqrt(2.0)

    def beams(x, t):
        X, Z = x[..., 0], x[..., 1]
        q = Z + q0
        carrier = np.exp(1j * (k * Z - k * t))
        out = []
        for j, (xj, aj) in enumerate(zip(xs, amps)):
            ph = np.exp(1j * drift * t) if j == 1 else 1.0
            b = aj * ph * np.sqrt(q0 / q) * np.exp(1j * k * (X - xj) ** 2 / (2 * q)) * carrier
            out.append((b, X - xj, q))
        return out

    def psi(x, t):
        (a, _, _), (b, _, _) = beams(x, t)
        return norm * (a + b)

    def grad(x, t):
        g_ = 0
        for b, dx, q in beams(x, t):
            gx = b * 1j * k * dx / q
            gz = b * (-0.5 / q - 1j * k * dx**2 / (2 * q * q) + 1j * k)
            g_ = g_ + np.stack([gx, gz], axis=-1)
        return norm * g_

    f = ComplexField(psi, 2, grad, scale=norm * (1.0 + amplitude_b), propagation_axis=1)
    object.__setattr__(f, "beams", beams)
    return f, g


def fringe_minima(field_: ComplexField, z, x_range, n=20001):
    """Local minima of ``|psi(x, z)|^2`` along a screen line, refined parabolically."""
    x = np.linspace(*x_range, n)
    pts = np.stack([x, np.full_like(x, z)], axis=-1)
    I = np.abs(field_(pts, 0.0)) ** 2
    i = np.nonzero((I[1:-1] < I[:-2]) & (I[1:-1] <= I[2:]))[0] + 1
    h = x[1] - x[0]
    num = I[i - 1] - I[i + 1]
    den = I[i - 1] - 2 * I[i] + I[i + 1]
    off = np.where(den > 0, 0.5 * num / np.where(den > 0, den, 1.0), 0.0)
    return x[i] + off * h


# ---------------------------------------------------------------------------
# two-body fields
# ---------------------------------------------------------------------------


def product_state(psi1: ComplexField, psi2: ComplexField):
    """``Psi = psi1(r1) psi2(r2)``."""

    def psi(r1, r2, t):
        return psi1(r1, t) * psi2(r2, t)

    def g1(r1, r2, t):
        return psi1.gradient(r1, t) * psi2(r2, t)[..., None]

    def g2(r1, r2, t):
        return psi1(r1, t)[..., None] * psi2.gradient(r2, t)

    scale = (psi1.scale or 1.0) * (psi2.scale or 1.0)
    return TwoBodyField(psi, psi1.dim, g1, g2, scale=scale)


def relative_state(k=1.0, c=0.5, omega=1.0):
    """``(exp(i k (x1 - x2)) + c exp(2 i k (x1 - x2))) exp(-i omega t)`` in one dimension."""

    def psi(r1, r2, t):
        u = r1[..., 0] - r2[..., 0]
        return (np.exp(1j * k * u) + c * np.exp(2j * k * u)) * np.exp(-1j * omega * t)

    def g1(r1, r2, t):
        u = r1[..., 0] - r2[..., 0]
        return ((1j * k * np.exp(1j * k * u) + 2j * k * c * np.exp(2j * k * u)) * np.exp(-1j * omega * t))[..., None]

    def g2(r1, r2, t):
        return -g1(r1, r2, t)

    return TwoBodyField(psi, 1, g1, g2, scale=1.0 + abs(c))


def two_mode_state(psi_a: ComplexField, phi_a: ComplexField, psi_b: ComplexField, phi_b: ComplexField):
    """``Psi = [psi_a(r1) phi_a(r2) + psi_b(r1) phi_b(r2)] / sqrt(2)``."""
    s = 1.0 / np.sqrt(2.0)

    def psi(r1, r2, t):
        return s * (psi_a(r1, t) * phi_a(r2, t) + psi_b(r1, t) * phi_b(r2, t))

    def g1(r1, r2, t):
        return s * (psi_a.gradient(r1, t) * phi_a(r2, t)[..., None] + psi_b.gradient(r1, t) * phi_b(r2, t)[..., None])

    def g2(r1, r2, t):
        return s * (psi_a(r1, t)[..., None] * phi_a.gradient(r2, t) + psi_b(r1, t)[..., None] * phi_b.gradient(r2, t))

    return TwoBodyField(psi, psi_a.dim, g1, g2)


def entangled_pair_velocity(field_: TwoBodyField, law: GuidanceLaw, r1, r2, t=0.0, *, threshold=None):
    """Velocities of both particles from the gradient in each argument."""
    r1, r2 = np.asarray(r1, dtype=float), np.asarray(r2, dtype=float)
    psi = field_(r1, r2, t)
    thr = threshold if threshold is not None else (1e-8 * field_.scale if field_.scale else 0.0)
    if np.any(np.abs(psi) <= thr) or np.any(psi == 0):
        raise NodalPointError("configuration point is on a node of Psi")
    dphase = np.imag(field_.time_derivative(r1, r2, t) / psi) if law.variant == "klein_gordon" else None
    out = []
    for which, x in ((1, r1), (2, r2)):
        gp = np.imag(field_.gradient(r1, r2, t, which) / psi[..., None])
        out.append(law.velocity(gp, dphase, x, t))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# equivariance
# ---------------------------------------------------------------------------


@dataclass
class EquivarianceResult:
    """Histogram of final positions against the transported density."""

    divergence: float
    edges: np.ndarray
    counts: np.ndarray
    psi2: np.ndarray
    finals: np.ndarray
    halted: int
    notes: list = field(default_factory=list)


def _sample(field_, n, box, rng, fixed, t0):
    lo, hi = box
    grid = np.linspace(lo, hi, 4001)
    pts = _line(grid, fixed, field_.dim)
    pmax = 1.1 * np.max(np.abs(field_(pts, t0)) ** 2)
    out = []
    while sum(len(o) for o in out) < n:
        x = rng.uniform(lo, hi, 4 * n)
        u = rng.uniform(0, pmax, 4 * n)
        p = np.abs(field_(_line(x, fixed, field_.dim), t0)) ** 2
        out.append(x[u < p])
    return np.concatenate(out)[:n]


def _line(x, fixed, dim):
    x = np.asarray(x, dtype=float)
    pts = np.zeros(x.shape + (dim,))
    pts[..., 0] = x
    for j, v in enumerate(fixed or (), start=1):
        pts[..., j] = v
    return pts


def sample_born(field_: ComplexField, n, box, rng, *, fixed=None, t=0.0):
    """Draw ``n`` points from ``|psi|^2`` along coordinate 0 by rejection.

    Parameters
    ----------
    box : tuple
        Sampling interval on coordinate 0.
    rng : numpy.random.Generator
    fixed : sequence, optional
        Values of the remaining coordinates (e.g. ``(z,)`` for a beam).

    Returns
    -------
    ndarray, shape (n, dim)
    """
    x = _sample(field_, n, box, rng, fixed, t)
    return _line(x, fixed, field_.dim)


def _sym_kl(p, q, eps=1e-12):
    p = p / p.sum()
    q = q / q.sum()
    p, q = p + eps, q + eps
    return float(np.sum(p * np.log(p / q) + q * np.log(q / p)))


def equivariance_check(field_: ComplexField, law: GuidanceLaw, n_samples, t_span, box, *, bins=50, dt=None,
                       seed=0, final_range=None):
    """Transport ``|psi(0)|^2``-distributed samples and compare with ``|psi(T)|^2``.

    Samples are drawn along coordinate 0 inside ``box`` by rejection.
    For beams with a ``propagation_axis`` the samples start on the plane
    ``z = t_span[0]`` and are carried along streamlines to ``z = t_span[1]``;
    the reference density is then the flux ``|psi|^2 v_z`` on that plane.

    Returns
    -------
    EquivarianceResult
        ``divergence`` is the symmetric Kullback-Leibler divergence between
        the binned sample and reference distributions.

    Raises
    ------
    ValueError
        Fewer than 100 samples.
    """
    if n_samples < 100:
        raise ValueError("equivariance needs at least 100 samples")
    rng = np.random.default_rng(seed)
    t0, t1 = t_span
    axis = field_.propagation_axis
    fixed0 = (t0,) if axis is not None else None
    x0 = _sample(field_, n_samples, box, rng, fixed0, 0.0 if axis is not None else t0)
    X0 = _line(x0, fixed0, field_.dim)
    if dt is None:
        dt = (t1 - t0) / 400
    ts, X, halted = integrate_ensemble(field_, law, X0, t_span, dt)
    finals = X[-1][:, 0]
    if final_range is None:
        lo, hi = np.quantile(finals, [0.0005, 0.9995])
    else:
        lo, hi = final_range
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(finals[~halted], edges)
    # reference mass per bin by Simpson-like fine sampling
    fine = np.linspace(lo, hi, bins * 40 + 1)
    fixed1 = (t1,) if axis is not None else None
    pts = _line(fine, fixed1, field_.dim)
    tt = 0.0 if axis is not None else t1
    dens = np.abs(field_(pts, tt)) ** 2
    if axis is not None:
        dens = dens * guidance_velocity(field_, law, pts, tt, threshold=0.0)[..., axis]
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(fine))))
    mass = np.diff(np.interp(edges, fine, cum))
    div = _sym_kl(counts.astype(float), mass)
    notes = []
    if halted.any():
        notes.append(f"{int(halted.sum())} samples halted near nodes")
    return EquivarianceResult(div, edges, counts, mass, finals, int(halted.sum()), notes)


def depletion_centres(finals, guesses):
    """Centre of the empty gap in sorted endpoints around each guessed minimum.

    Guided trajectories never cross a nodal line, so the endpoint
    histogram is empty around each fringe minimum; the gap midpoint is
    the resolution-free estimate of that minimum.
    """
    xs = np.sort(np.asarray(finals, dtype=float))
    out = []
    for m in np.atleast_1d(guesses):
        i = int(np.searchsorted(xs, m))
        if i == 0 or i == xs.size:
            out.append(np.nan)
            continue
        out.append(0.5 * (xs[i - 1] + xs[i]))
    return np.array(out)
