import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitonlab.numerics import (
    PhysicalConstants,
    RadialGrid,
    RadialProfile,
    bisect_sign,
    find_root,
    integrate_ivp,
    radial_integral,
)


def test_grid_rejects_bad_points():
    with pytest.raises(ValueError):
        RadialGrid(np.array([1.0]))
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 1.0]), "inward")
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 1.0]), "sideways")


def test_grid_order():
    g = RadialGrid.geometric(1e-3, 10.0, 5)
    assert g.ordered()[0] == pytest.approx(10.0)
    assert RadialGrid.linear(0.0, 1.0, 3).ordered()[0] == 0.0


def test_ivp_exponential_decay_both_directions():
    out = RadialGrid.linear(0.0, 5.0, 51)
    res = integrate_ivp(lambda r, y: -y, [1.0], out, 1e-12)
    assert res.ok
    assert np.max(np.abs(res.y[:, 0] - np.exp(-out.points))) < 1e-11
    inward = RadialGrid.geometric(1e-2, 5.0, 40)
    res = integrate_ivp(lambda r, y: -y, [np.exp(-5.0)], inward, 1e-12, log_radius=True)
    assert res.ok
    assert np.max(np.abs(res.y[:, 0] / np.exp(-inward.points) - 1)) < 1e-9


def test_ivp_blowup_is_reported_not_raised():
    # y' = y^2, y(0) = 1 blows up at r = 1
    g = RadialGrid.linear(0.0, 2.0, 201)
    res = integrate_ivp(lambda r, y: y * y, [1.0], g, 1e-10, blowup=1e8)
    assert res.status == "blowup"
    assert res.stop_rho == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.isnan(res.y[g.points > 1.0]))


def test_ivp_step_budget():
    g = RadialGrid.linear(0.0, 1e4, 3)
    res = integrate_ivp(lambda r, y: np.array([y[1], -1e4 * y[0]]), [1.0, 0.0], g, 1e-12, max_steps=50)
    assert res.status == "stalled"


def test_find_root_scalar_dottie_number():
    x, rep = find_root(lambda x: np.cos(x) - x, (0.0, 1.0), 1e-14)
    assert rep.converged
    assert x == pytest.approx(0.7390851332151607, abs=1e-13)


def test_find_root_vector():
    def F(v):
        x, y = v
        return np.array([x * x + y * y - 4.0, x - y])

    x, rep = find_root(F, np.array([1.0, 1.5]), 1e-12, kind="vector")
    assert rep.converged
    assert np.allclose(x, [np.sqrt(2.0), np.sqrt(2.0)], atol=1e-10)


def test_find_root_needs_sign_change():
    with pytest.raises(ValueError):
        find_root(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_bisect_sign_threshold():
    x, rep = bisect_sign(lambda a: -1 if a > 0.3 else 1, 0.0, 1.0, xtol=1e-12)
    assert rep.converged
    assert x == pytest.approx(0.3, abs=1e-12)


def test_radial_integral_weights():
    rho = np.linspace(0.0, 60.0, 200001)
    e = np.exp(-rho)
    assert radial_integral(rho, "4pi rho^2", e) == pytest.approx(8 * np.pi, rel=1e-8)
    assert radial_integral(rho, "4pi rho^3", e) == pytest.approx(24 * np.pi, rel=1e-8)
    assert radial_integral(RadialProfile(rho, e), "1") == pytest.approx(1.0, rel=1e-8)
    with pytest.raises(ValueError):
        radial_integral(rho, "rho^5", e)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_radial_integral_is_linear(a, b):
    rho = np.linspace(0.0, 3.0, 301)
    f, g = np.sin(rho), rho**2
    lhs = radial_integral(rho, "4pi rho^2", a * f + b * g)
    rhs = a * radial_integral(rho, "4pi rho^2", f) + b * radial_integral(rho, "4pi rho^2", g)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


def test_codata_constants_are_consistent():
    import scipy.constants as sc

    c = PhysicalConstants.codata()
    # independent route: r_e from e^2/(4 pi eps0 m c^2)
    r_e = sc.e**2 / (4 * np.pi * sc.epsilon_0 * sc.m_e * sc.c**2)
    assert c.classical_electron_radius == pytest.approx(r_e, rel=1e-9)
    assert c.coulomb_volts_metre == pytest.approx(sc.e / (4 * np.pi * sc.epsilon_0), rel=1e-9)
    assert c.critical_field == pytest.approx(sc.m_e * sc.c**2 / (sc.e * r_e), rel=1e-9)


def test_constants_invariant_enforced():
    with pytest.raises(ValueError):
        PhysicalConstants(1 / 137, 3.86e-13, 1e-15, 1.8e20, 5.11e5)
