import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.dirac_soliton import (
    SPIN_TARGET,
    DiracParams,
    DiracState,
    dirac_rhs,
    far_field_seed,
    kg_effective_potential_demo,
    kg_rhs,
    ode_residual,
    similarity_transform,
)


@settings(max_examples=40, deadline=None)
@given(beta=st.one_of(st.floats(-2, 0), st.floats(1, 3)))
def test_params_reject_beta_outside_unit_interval(beta):
    with pytest.raises(ValueError):
        DiracParams(beta=beta)


def test_params_reject_bad_kappa():
    with pytest.raises(ValueError):
        DiracParams(kappa=2)


@pytest.mark.parametrize("kappa", [-1, 1])
def test_rhs_matches_hand_evaluation(kappa):
    p = DiracParams(kappa=kappa, alpha=0.2, beta=0.4, sign_eE=-1)
    rho, g, f, v, dv = 0.7, 0.3, -0.1, 0.5, -0.2
    b = 0.4 + 0.5 * 0.2 * v  # beta - s alpha V / 2 with s = -1
    if kappa == -1:
        expect = [(1 + b) * f, 2 / rho * f + (1 - b) * g]
    else:
        expect = [2 / rho * g + (1 + b) * f, (1 - b) * g]
    expect += [dv, -2 / rho * dv + (f * f + g * g)]
    assert np.allclose(dirac_rhs(rho, DiracState(g, f, v, dv), p), expect, rtol=1e-15)


def test_kg_rhs_charge_factor():
    p = DiracParams(alpha=0.2, beta=0.4, sign_eE=-1)
    g, f, v, dv, rho = 0.3, -0.1, 0.5, -0.2, 0.7
    d = kg_rhs(rho, (g, f, v, dv), p)
    assert d[1] == pytest.approx(-2 / rho * f + (1 - (0.4 + 0.1 * v) ** 2) * g)
    assert d[3] == pytest.approx(-2 / rho * dv + (0.4 + 0.2 * v) * g * g)


def test_rhs_rejects_origin():
    with pytest.raises(ValueError):
        dirac_rhs(0.0, (1.0, 1.0, 0.0, 0.0), DiracParams())


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.9])
def test_far_field_seed_is_decaying_eigenvector(beta):
    p = DiracParams(beta=beta, alpha=0.0, rho_max=200.0)
    y = far_field_seed(p, 1.0, 0.0)
    d = dirac_rhs(p.rho_max, y, p)
    # both components decay like exp(-k rho) up to O(1/(k rho)) corrections
    assert d[0] / y[0] == pytest.approx(-p.k, rel=5.0 / (p.k * p.rho_max))
    assert d[1] / y[1] == pytest.approx(-p.k, rel=5.0 / (p.k * p.rho_max))


def test_effective_potential_sign_pattern():
    demo = kg_effective_potential_demo(E=0.5)
    deep = demo["V"] > demo["E"] + 1.0
    # Dirac: attractive well at the origin; KG: repulsive barrier
    assert deep.sum() > 5
    assert np.all(demo["dirac"][deep] < 0) and np.argmin(demo["dirac"]) == 0
    assert np.all(demo["kg"][deep] > 1.0) and np.argmax(demo["kg"]) == 0
    far = demo["rho"] > 2.0
    assert np.allclose(demo["dirac"][far], demo["kg"][far])


def test_solution_is_self_consistent(dirac_minus):
    sol, _ = dirac_minus
    assert sol.report.converged
    assert sol.observables.spin == pytest.approx(SPIN_TARGET, abs=1e-9)
    assert sol.observables.total_mass == pytest.approx(sol.params.beta, abs=1e-8)
    assert sol.observables.alpha_out == pytest.approx(0.0072973525693, rel=1e-6)
    assert ode_residual(sol) < 1e-6


def test_field_energy_equals_interaction_energy(dirac_minus):
    # Green's identity: int |grad V|^2 = int V * source once the exterior tail is included
    sol, _ = dirac_minus
    o = sol.observables
    assert o.F_d == pytest.approx(o.V_d, rel=1e-4)


def test_origin_regularity(dirac_minus):
    sol, _ = dirac_minus
    assert sol.constraints["origin_small_rel"] < 1e-3
    assert sol.constraints["origin_rho_dlarge_rel"] < 1e-3


@pytest.mark.parametrize("tau", [0.5, 2.0, 5.0])
def test_similarity_scales_integrals_inversely(dirac_minus, tau):
    sol, _ = dirac_minus
    t = similarity_transform(sol, tau)
    o, ot = sol.observables, t.observables
    for name in ("spin", "charge_integral", "alpha_out", "m_g", "m_f", "m_fg", "F_d"):
        assert getattr(ot, name) == pytest.approx(getattr(o, name) / tau, rel=1e-10)
    assert t.params.alpha == pytest.approx(tau * sol.params.alpha)


def test_similarity_rejects_nonpositive(dirac_minus):
    with pytest.raises(ValueError):
        similarity_transform(dirac_minus[0], 0.0)


def test_kappa_plus_one_solution(dirac_plus):
    sol, _ = dirac_plus
    assert sol.report.converged
    assert sol.params.kappa == 1
    assert ode_residual(sol) < 1e-6
    assert sol.observables.spin == pytest.approx(SPIN_TARGET, abs=1e-9)
