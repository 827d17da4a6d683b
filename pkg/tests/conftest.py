"""Shared expensive solves and the acceptance summary printed after the run."""

import time

import pytest

ACCEPTANCE_LINES = []


def record_acceptance(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def dirac_minus():
    """Self-consistent kappa=-1 solution and its wall time in seconds."""
    from solitonlab.dirac_soliton import solve_soliton

    return _timed(solve_soliton, -1)


@pytest.fixture(scope="session")
def dirac_plus():
    from solitonlab.dirac_soliton import solve_soliton

    return _timed(solve_soliton, 1)


@pytest.fixture(scope="session")
def photon_ground():
    from solitonlab.photon_soliton import ground_state

    return ground_state(1.0)


@pytest.fixture(scope="session")
def double_slit_ensemble():
    """Streamline ensemble from the slits to the screen, with its geometry."""
    import numpy as np

    from solitonlab.pilot_wave import GuidanceLaw, double_slit_field, equivariance_check

    f, g = double_slit_field()
    stamps = np.concatenate(([0.0], np.geomspace(1.0, g.screen_distance, 600)))
    res = equivariance_check(f, GuidanceLaw(), 10_000, (0.0, g.screen_distance), (-90.0, 90.0), bins=160,
                             dt=stamps, seed=0, final_range=(-400.0, 400.0))
    return f, g, res
