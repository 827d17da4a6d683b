"""Rotating-frame Bloch dynamics with the quantum-force split, and dipole decay.

The dipole is ``x = x0 (u cos wt - v sin wt)`` under a drive
``E = 2 eps cos wt``; ``w`` is the upper-level population. The quadrature
equation is written as a force balance

    v' + u omega/2 = F_restoring + F_dissipation + F_driving + F_quantum

with ``F_driving = -chi``, ``F_quantum = 2 w chi`` and
``chi = e eps / (m omega x0)``, so the net drive is ``-(1 - 2w) chi``. The
in-phase and population equations follow the standard optical Bloch
closure, chosen so that ``u^2 + v^2 + (2w - 1)^2`` is conserved without
damping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import PhysicalConstants, RadialGrid, SolveReport, integrate_ivp

__all__ = [
    "BlochState",
    "DriveParams",
    "ForceDiagram",
    "BlochTrace",
    "DipoleDecay",
    "bloch_rhs",
    "force_diagram",
    "integrate_bloch",
    "dipole_decay_params",
]


@dataclass(frozen=True)
class BlochState:
    """In-phase ``u``, quadrature ``v`` and upper population ``w``."""

    u: float = 0.0
    v: float = 0.0
    w: float = 0.0

    @property
    def norm(self):
        """Bloch-vector length squared, ``u^2 + v^2 + (2w - 1)^2``."""
        return self.u**2 + self.v**2 + (2 * self.w - 1) ** 2

    def as_array(self):
        return np.array([self.u, self.v, self.w], dtype=float)


@dataclass(frozen=True)
class DriveParams:
    """Drive and atom parameters; ``tau0 = inf`` switches relaxation off."""

    omega: float = 1.0
    omega_a: float = 1.0
    epsilon: float = 0.05
    tau0: float = np.inf
    x0: float = 1.0
    m: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        for name in ("omega", "omega_a", "tau0", "x0", "m", "e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @property
    def chi(self):
        """Drive strength ``e eps / (m omega x0)`` in the quadrature equation."""
        return self.e * self.epsilon / (self.m * self.omega * self.x0)

    @property
    def detuning(self):
        """``(omega_a^2 - omega^2)/(2 omega)``: restoring minus frame term per unit u."""
        return (self.omega_a**2 - self.omega**2) / (2 * self.omega)


@dataclass(frozen=True)
class ForceDiagram:
    """Signed force components of the quadrature equation and their resultant."""

    restoring: float
    dissipation: float
    driving: float
    quantum: float
    resultant: float

    @property
    def effective_drive(self):
        return self.driving + self.quantum

    @property
    def closure(self):
        """``sum of components - resultant``; zero up to round-off."""
        return self.restoring + self.dissipation + self.driving + self.quantum - self.resultant


def _damping(p: DriveParams):
    return 0.0 if np.isinf(p.tau0) else 1.0 / p.tau0


def _components(y, p: DriveParams):
    u, v, w = y[0], y[1], y[2]
    g = _damping(p)
    du = -p.detuning * v - g * u
    restoring = u * p.omega_a**2 / (2 * p.omega)
    dissipation = -g * v + g * du / p.omega
    driving = -p.chi * np.ones_like(u)
    quantum = 2 * w * p.chi
    return restoring, dissipation, driving, quantum


def bloch_rhs(state, params: DriveParams, t=0.0):
    """Time derivatives ``(u', v', w')``; the drive is constant in the rotating frame."""
    y = state.as_array() if isinstance(state, BlochState) else np.asarray(state, dtype=float)
    u, v, w = y[0], y[1], y[2]
    g = _damping(params)
    d, chi = params.detuning, params.chi
    du = -d * v - g * u
    dv = d * u - g * v + g * du / params.omega - (1 - 2 * w) * chi
    dw = -chi * v / 2 - g * w
    return np.array([du, dv, dw])


def force_diagram(state, params: DriveParams, t=0.0) -> ForceDiagram:
    """Force components at a state; ``resultant`` is ``v' + u omega/2`` taken from :func:`bloch_rhs`."""
    y = state.as_array() if isinstance(state, BlochState) else np.asarray(state, dtype=float)
    comps = _components(y, params)
    resultant = bloch_rhs(y, params)[1] + y[0] * params.omega / 2
    return ForceDiagram(*(float(c) for c in comps), float(resultant))


@dataclass
class BlochTrace:
    """Sampled Bloch trajectory with per-sample force components."""

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    forces: dict
    closure: np.ndarray
    report: SolveReport = field(default_factory=lambda: SolveReport(True, 0, 0.0))

    @property
    def norm(self):
        return self.u**2 + self.v**2 + (2 * self.w - 1) ** 2


def integrate_bloch(params: DriveParams, state0=BlochState(), t_end=None, *, n_cycles=10.0, n_samples=2001,
                    tol=1e-12) -> BlochTrace:
    """Integrate the Bloch equations and record the force diagram at every sample.

    Parameters
    ----------
    t_end : float, optional
        Final time; defaults to ``n_cycles`` drive periods.
    tol : float
        Relative tolerance of the integrator.

    Returns
    -------
    BlochTrace
        ``closure`` holds ``|sum of forces - (v' + u omega/2)|`` at each
        sample, with ``v'`` evaluated independently from :func:`bloch_rhs`.
    """
    if t_end is None:
        t_end = n_cycles * 2 * np.pi / params.omega
    grid = RadialGrid.linear(0.0, t_end, n_samples)
    y0 = state0.as_array() if isinstance(state0, BlochState) else np.asarray(state0, dtype=float)
    res = integrate_ivp(lambda t, y: bloch_rhs(y, params, t), y0, grid, tol, atol=tol * 1e-2)
    ys = res.y.T
    u, v, w = ys
    names = ("restoring", "dissipation", "driving", "quantum")
    forces = {k: np.asarray(c, dtype=float) for k, c in zip(names, _components(ys, params))}
    forces["resultant"] = bloch_rhs(ys, params)[1] + u * params.omega / 2
    closure = np.abs(sum(forces[k] for k in names) - forces["resultant"])
    rep = SolveReport(res.ok, res.n_steps, 0.0 if res.ok else np.inf, 0.0, [res.message] if res.message else [])
    return BlochTrace(grid.points, u, v, w, forces, closure, rep)


@dataclass(frozen=True)
class DipoleDecay:
    """Classical radiating-dipole constants at angular frequency ``omega``."""

    omega: float
    tau: float
    Gamma: float
    phase_alpha: float
    delta_omega: float
    regime_ok: bool


def dipole_decay_params(omega, constants: PhysicalConstants | None = None) -> DipoleDecay:
    """Radiation-reaction time and the derived decay constants.

    ``tau = (2/3) r_e / c``, ``Gamma = tau omega^2``, ``sin(alpha) = tau omega``
    and ``delta_omega = tau^2 omega^3 / 2``. ``regime_ok`` is False when
    ``tau omega > 1``, where the phase-lag formula no longer applies; the
    lag is then clipped to ``pi/2``.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    c = constants or PhysicalConstants.codata()
    tau = 2.0 / 3.0 * c.classical_electron_radius / c.speed_of_light
    s = tau * omega
    return DipoleDecay(
        omega=float(omega),
        tau=tau,
        Gamma=tau * omega**2,
        phase_alpha=float(np.arcsin(min(s, 1.0))),
        delta_omega=0.5 * tau**2 * omega**3,
        regime_ok=bool(s <= 1.0),
    )
