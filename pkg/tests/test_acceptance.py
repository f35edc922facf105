"""End-to-end acceptance suite.

Eleven checks covering oracle equivalence, closed-form limits, the two
structural properties of the converged solution, the qualitative shapes of
every headline figure, and bit-level determinism of the CLI. Each check
prints a single PASS/FAIL line (run with ``pytest -s`` to see them live).
"""
from dataclasses import replace

import numpy as np
import pytest

from oswindow import (
    EconParams,
    GridSpec,
    api_demand,
    audit_propositions,
    development_value,
    firm_profit,
    indifference_price,
    marginal_adopter,
    open_source_window,
    optimal_compute,
    phi_value_crossing,
    solve_closed,
    solve_open,
    static_optimal_compute,
    sweep_firm_size,
    sweep_phi,
    sweep_qb,
    theta,
)
from oswindow.cli import load_config, run
from oswindow.oracle import (
    FiniteHorizonSpec,
    finite_horizon_closed,
    finite_horizon_open,
    per_producer_profit_quadrature,
)
from oswindow.solver import OPEN_SOURCE

P = EconParams()
TOL = 1e-6
ORACLE_GRID = GridSpec(q_min=0.0, q_max=200.0, n_q=11, k_max_open=8.0, n_k_open=10,
                       n_k_closed=10, n_p=4, n_x=100)


def report(num: int, name: str, ok: bool):
    print(f"[acceptance] criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} ({name}) failed"


def truncation_horizon(p, v_max, tol):
    return int(np.ceil(np.log(tol / v_max) / np.log(p.beta))) + 1


def test_01_oracle_equivalence():
    p = replace(P, beta=0.6)
    v_open = solve_open(p, ORACLE_GRID, tol=TOL, interpolation="nearest")
    closed = solve_closed(v_open, p, ORACLE_GRID, tol=TOL, interpolation="nearest")
    T = truncation_horizon(p, max(np.max(v_open.value), np.max(np.abs(closed.value))), TOL)
    oracle_open = finite_horizon_open(p, ORACLE_GRID, FiniteHorizonSpec(T))
    oracle_closed = finite_horizon_closed(p, ORACLE_GRID, v_open, FiniteHorizonSpec(T))
    err_open = np.max(np.abs(oracle_open - v_open.value))
    err_closed = np.max(np.abs(oracle_closed - closed.value))
    report(1, "oracle-equivalence", err_open < 10 * TOL and err_closed < 10 * TOL)


def test_02_closed_form_checks():
    p0 = replace(P, beta=0.0)
    grid = ORACLE_GRID
    sol = solve_open(p0, grid, tol=TOL)
    static = np.max(firm_profit(grid.q_grid[:, None], grid.k_grid_open[None, :], p0), axis=1)
    ok_static = np.max(np.abs(sol.value - static)) < 1e-6

    rng = np.random.default_rng(20240817)
    ok_duality = True
    for _ in range(1000):
        q_b = rng.uniform(1.0, 300.0)
        q_a = q_b + rng.uniform(0.5, 200.0)
        x_hat = rng.uniform(P.m + 1e-3, 1.0 - 1e-3)
        price = indifference_price(x_hat, q_a, q_b, P)
        ok_duality &= abs(api_demand(q_a, q_b, price, P) - (x_hat - P.m)) < 1e-8
        ok_duality &= abs(marginal_adopter(q_a, q_b, price, P) - x_hat) < 1e-8

    q = 100.0
    k_star = static_optimal_compute(q, P)
    aggregate = theta(P) * (q * k_star) ** P.alpha - k_star
    integral = per_producer_profit_quadrature(q, lambda x: optimal_compute(x, q, P), P, 2000)
    ok_theta = abs(aggregate - integral) < 1e-3 * abs(integral)
    report(2, "closed-form-checks", ok_static and ok_duality and ok_theta)


def test_03_threshold_property(baseline_solution, baseline_params):
    v_open, closed = baseline_solution
    rep = audit_propositions(closed, v_open, baseline_params)
    report(3, "single-threshold-per-column", len(rep.threshold_violations) == 0)


def test_04_price_cap_property(baseline_solution, baseline_params):
    v_open, closed = baseline_solution
    rep = audit_propositions(closed, v_open, baseline_params)
    report(4, "price-cap", len(rep.price_violations) == 0)


def test_05_open_source_window_shape(baseline_solution):
    _, closed = baseline_solution
    win = open_source_window(closed, 100.0)
    q = closed.q_grid
    j = int(np.argmin(np.abs(q - 100.0)))
    col = closed.decision[j:, j]
    below = q[j:] <= win.q_star
    ok_split = np.array_equal(col == OPEN_SOURCE, below)
    report(5, "positive-window-at-qb-100",
           win.abs_width > 0 and win.contiguous and ok_split)


def test_06_firm_size_inverted_u(baseline_params, baseline_grid):
    m_values = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9)
    res = sweep_firm_size(m_values, baseline_params, baseline_grid, 100.0, tol=TOL)
    w = np.array([win.abs_width for win in res.windows])
    step = baseline_grid.dq + 1e-9
    i = int(np.argmax(w))
    ok = (0 < i < len(w) - 1
          and w[i] > w[0] and w[i] > w[-1]
          and np.all(np.diff(w[: i + 1]) >= -step)
          and np.all(np.diff(w[i:]) <= step))
    report(6, "firm-size-inverted-u", bool(ok))


def test_07_phi_monotone(baseline_params, baseline_grid):
    phi_values = (0.02, 0.05, 0.1, 0.2, 0.35, 0.5)
    res = sweep_phi(phi_values, baseline_params, baseline_grid, 100.0, tol=TOL)
    w = np.array([win.abs_width for win in res.windows])
    report(7, "phi-monotone-with-zero-floor",
           bool(np.all(np.diff(w) >= 0.0) and w[0] == 0.0))


def test_08_qb_sweep_shape(baseline_params, baseline_grid):
    qb_values = (50.0, 100.0, 150.0, 200.0, 250.0)
    res = sweep_qb(qb_values, baseline_params, baseline_grid, tol=TOL)
    abs_w = np.array([win.abs_width for win in res.windows])
    rel_w = np.array([win.rel_width for win in res.windows])
    variation = (rel_w.max() - rel_w.min()) / rel_w.max()
    report(8, "qb-sweep-widths",
           bool(np.all(np.diff(abs_w) >= 0.0) and variation < 0.5))


def test_09_phi_value_crossing(baseline_solution, baseline_params, baseline_grid):
    _, closed = baseline_solution
    q_star = open_source_window(closed, 100.0).q_star
    crossing, low, high = phi_value_crossing(baseline_params, baseline_grid, 100.0,
                                             0.1, 0.5, tol=TOL)
    if crossing is None:
        report(9, "phi-crossing-above-threshold", False)
        return
    q = baseline_grid.q_grid
    j = int(np.argmin(np.abs(q - 100.0)))
    idx = int(np.argmin(np.abs(q[j:] - crossing)))
    ok = (high[0] > low[0]
          and np.all(high[:idx] >= low[:idx])
          and low[idx] > high[idx]
          and crossing > q_star)
    report(9, "phi-crossing-above-threshold", bool(ok))


def test_10_development_value_shape(baseline_grid):
    m_values = (0.1, 0.2, 0.4)
    qb_values = np.arange(20.0, 201.0, 20.0)
    table = {}
    for m in m_values:
        p_m = replace(P, m=m)
        v_open = solve_open(p_m, baseline_grid, tol=TOL)
        closed = solve_closed(v_open, p_m, baseline_grid, tol=TOL)
        table[m] = np.array([
            development_value(qb, v_open, closed, p_m).expected_value for qb in qb_values
        ])
    ok_m = True
    for a, b in zip(m_values[:-1], m_values[1:]):
        ok_m &= bool(np.all(table[b] >= table[a] - 1e-9))
    mid = qb_values >= 120.0
    ok_qb = bool(np.all(np.diff(table[0.2][mid]) < 0.0))
    report(10, "development-value-shape", ok_m and ok_qb)


def test_11_deterministic_figures(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[grid]\n"
        "q_max = 200\nn_q = 11\nk_max_open = 8\nn_k_open = 10\n"
        "n_k_closed = 8\nn_p = 4\nn_x = 100\n\n"
        "[experiment]\n"
        "q_b = 60\nm_values = 0.1, 0.3\nphi_values = 0.1, 0.5\n"
        "qb_values = 40, 80, 120\ndev_m_values = 0.2\ndev_qb_values = 40, 80\n"
        "quadrature_nodes = 51\nphi_low = 0.1\nphi_high = 0.5\n"
    )
    cfg = load_config(ini)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    files_a = sorted(p.name for p in run("all-figures", cfg, out_a))
    files_b = sorted(p.name for p in run("all-figures", cfg, out_b))
    ok = files_a == files_b
    for name in files_a:
        if name == "manifest.ini":
            continue  # records the output directory, which differs by design
        ok &= (out_a / name).read_bytes() == (out_b / name).read_bytes()
    report(11, "byte-identical-figures", bool(ok))
