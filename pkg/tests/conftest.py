import numpy as np
import pytest

from oswindow import EconParams, GridSpec, solve_closed, solve_open

TOL = 1e-6


@pytest.fixture(scope="session")
def baseline_params():
    return EconParams()


@pytest.fixture(scope="session")
def baseline_grid():
    return GridSpec()


@pytest.fixture(scope="session")
def small_grid():
    # cheap but non-degenerate; within oracle limits
    return GridSpec(q_min=0.0, q_max=200.0, n_q=11, k_max_open=8.0, n_k_open=10,
                    n_k_closed=8, n_p=4, n_x=100)


@pytest.fixture(scope="session")
def baseline_solution(baseline_params, baseline_grid):
    """Full-size open and closed solves at the baseline calibration, shared
    across acceptance and unit tests."""
    v_open = solve_open(baseline_params, baseline_grid, tol=TOL)
    closed = solve_closed(v_open, baseline_params, baseline_grid, tol=TOL)
    return v_open, closed


@pytest.fixture(scope="session")
def small_solution(baseline_params, small_grid):
    v_open = solve_open(baseline_params, small_grid, tol=TOL)
    closed = solve_closed(v_open, baseline_params, small_grid, tol=TOL)
    return v_open, closed


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
