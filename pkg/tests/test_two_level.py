import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.numerics import PhysicalConstants
from solitonlab.two_level import (
    BlochState,
    DriveParams,
    bloch_rhs,
    dipole_decay_params,
    force_diagram,
    integrate_bloch,
)


def test_drive_params_validation():
    with pytest.raises(ValueError):
        DriveParams(omega=0.0)
    with pytest.raises(ValueError):
        DriveParams(epsilon=-1.0)


def test_resonant_rabi_flopping():
    # at resonance with u = 0: w(t) = (1 - cos(chi t))/2
    p = DriveParams(omega=1.0, omega_a=1.0, epsilon=0.05)
    tr = integrate_bloch(p, BlochState(), t_end=4 * np.pi / p.chi, n_samples=801)
    assert np.max(np.abs(tr.w - 0.5 * (1 - np.cos(p.chi * tr.t)))) < 1e-9
    assert np.max(np.abs(tr.u)) < 1e-12


def test_norm_conserved_without_damping():
    p = DriveParams(omega=1.0, omega_a=1.2, epsilon=0.08)
    tr = integrate_bloch(p, BlochState(0.1, -0.2, 0.3), n_cycles=50)
    assert np.max(np.abs(tr.norm - tr.norm[0])) < 1e-10


def test_damping_relaxes_to_steady_state():
    p = DriveParams(omega=1.0, omega_a=1.05, epsilon=0.05, tau0=5.0)
    tr = integrate_bloch(p, BlochState(), n_cycles=60)
    assert tr.norm[-1] < 1.0
    assert np.linalg.norm(bloch_rhs([tr.u[-1], tr.v[-1], tr.w[-1]], p)) < 1e-8


@settings(max_examples=50, deadline=None)
@given(u=st.floats(-1, 1), v=st.floats(-1, 1), w=st.floats(0, 1), tau0=st.floats(0.5, 100),
       eps=st.floats(0, 0.5), wa=st.floats(0.5, 2))
def test_force_diagram_closes(u, v, w, tau0, eps, wa):
    p = DriveParams(omega=1.0, omega_a=wa, epsilon=eps, tau0=tau0)
    fd = force_diagram(BlochState(u, v, w), p)
    scale = max(abs(fd.restoring), abs(fd.dissipation), abs(fd.driving), abs(fd.quantum), 1e-12)
    assert abs(fd.closure) <= 1e-13 * scale


def test_effective_drive_changes_sign_at_half_population():
    p = DriveParams(epsilon=0.1)
    drives = [force_diagram(BlochState(0, 0, w), p).effective_drive for w in (0.25, 0.5, 0.75)]
    assert drives[0] < 0 and drives[1] == 0.0 and drives[2] > 0
    assert drives[0] == pytest.approx(-(1 - 0.5) * p.chi)


def test_dipole_identities_and_regime_flag():
    c = PhysicalConstants.codata()
    for w in (1e10, 3.7e15, 1e20):
        d = dipole_decay_params(w, c)
        assert d.Gamma == d.tau * w**2
        assert d.delta_omega == 0.5 * d.tau**2 * w**3
        assert np.sin(d.phase_alpha) == pytest.approx(d.tau * w, rel=1e-12)
        assert d.regime_ok
    hard = dipole_decay_params(1e24, c)
    assert not hard.regime_ok and hard.phase_alpha == pytest.approx(np.pi / 2)
    with pytest.raises(ValueError):
        dipole_decay_params(0.0)
