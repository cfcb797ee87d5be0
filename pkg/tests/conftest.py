"""Shared expensive solves, computed once per session."""

import time
import warnings

import numpy as np
import pytest

from conefield.core import PoleConfig
from conefield.solver import solve_dirac_ladder


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def _ladder(cfg, R, h):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = solve_dirac_ladder(cfg, R, h=h)
    res.elapsed = time.perf_counter() - t0
    return res


@pytest.fixture(scope="session")
def two_pole_run():
    """Masses 1 and 2 at (-0.5, 0) and (0.5, 0) on B_8."""
    cfg = PoleConfig(2, [((-0.5, 0.0), 1.0), ((0.5, 0.0), 2.0)], 2.0)
    return cfg, 8.0, _ladder(cfg, 8.0, 8.0 / 64)


@pytest.fixture(scope="session")
def asymmetric_run():
    """Masses 4 and 1 at distance 1.5 on B_8."""
    cfg = PoleConfig(2, [((-0.75, 0.0), 4.0), ((0.75, 0.0), 1.0)], 2.0)
    return cfg, 8.0, _ladder(cfg, 8.0, 8.0 / 64)


@pytest.fixture(scope="session")
def mixed_run():
    """+1 at (-1, 0) and -1 at (1, 0) on B_8."""
    cfg = PoleConfig(2, [((-1.0, 0.0), 1.0), ((1.0, 0.0), -1.0)], 3.0)
    return cfg, 8.0, _ladder(cfg, 8.0, 8.0 / 64)


@pytest.fixture(scope="session")
def single_pole_runs():
    """Unit mass at the origin of B_4 at h = R/64 and R/128."""
    cfg = PoleConfig(2, [((0.0, 0.0), 1.0)], 1.0)
    return cfg, 4.0, {k: _ladder(cfg, 4.0, 4.0 / k) for k in (64, 128)}


def oracle_error(result, alpha, R, r_min):
    """Sup error against Phi(x) - Phi(R) over |x| >= r_min, relative to sup|u|."""
    from conefield.radial import phi

    f = result.field
    r = np.linalg.norm(f.mesh.nodes, axis=1)
    exact = phi(2, alpha, r) - phi(2, alpha, R)
    sel = r >= r_min
    return float(np.abs(f.values - exact)[sel].max() / np.abs(f.values).max())
