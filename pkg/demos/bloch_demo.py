"""Driven two-level atom: the quantum force, closure of the force diagram, dipole decay.

Run ``python3 demos/bloch_demo.py``.
"""

import numpy as np

from solitonlab.two_level import BlochState, DriveParams, dipole_decay_params, force_diagram, integrate_bloch

p = DriveParams(omega=1.0, omega_a=1.0, epsilon=0.05)
tr = integrate_bloch(p, BlochState(), t_end=2 * np.pi / p.chi, n_samples=9)
print("resonant drive, one Rabi period:")
print(f"{'t':>8s} {'w':>8s} {'F_drive':>9s} {'F_quantum':>10s} {'net':>8s}")
for t, w, fd, fq in zip(tr.t, tr.w, tr.forces["driving"], tr.forces["quantum"]):
    print(f"{t:8.2f} {w:8.4f} {fd:9.4f} {fq:10.4f} {fd + fq:8.4f}")
print("the net drive changes sign when the population passes 1/2")

long = integrate_bloch(DriveParams(omega_a=1.1), n_cycles=1000, n_samples=20001)
print(f"1000 undamped cycles: norm drift {np.max(np.abs(long.norm - 1)):.1e}, closure {long.closure.max():.1e}")

damped = integrate_bloch(DriveParams(omega_a=1.05, tau0=5.0), n_cycles=60)
print(f"with relaxation tau0=5 the Bloch vector shrinks to length^2 {damped.norm[-1]:.4f}")
print(force_diagram(BlochState(damped.u[-1], damped.v[-1], damped.w[-1]), DriveParams(omega_a=1.05, tau0=5.0)))

d = dipole_decay_params(2 * np.pi * 299792458.0 / 500e-9)
print(f"500 nm: omega={d.omega:.4g}/s tau={d.tau:.4g} s Gamma={d.Gamma:.4g}/s "
      f"sin(alpha)={np.sin(d.phase_alpha):.4g} shift={d.delta_omega:.4g}/s")
