"""Window extraction, sweeps, the development decision, and audits."""
import copy
from dataclasses import replace

import numpy as np
import pytest

from oswindow import (
    EconParams,
    KEEP_CLOSED,
    OPEN_SOURCE,
    audit_propositions,
    development_value,
    model_value,
    open_source_window,
    phi_value_crossing,
    sweep_firm_size,
    sweep_phi,
    sweep_qb,
)

P = EconParams()


class TestOpenSourceWindow:
    def test_positive_window_at_baseline(self, baseline_solution):
        _, closed = baseline_solution
        win = open_source_window(closed, 100.0)
        assert win.abs_width > 0
        assert win.contiguous
        assert win.q_star >= win.q_b
        assert win.rel_width == pytest.approx(win.abs_width / 100.0)

    def test_no_room_at_grid_top(self, baseline_solution):
        _, closed = baseline_solution
        win = open_source_window(closed, closed.q_grid[-1])
        assert win.abs_width == 0.0

    def test_zero_rival_quality_guard(self, baseline_solution):
        _, closed = baseline_solution
        win = open_source_window(closed, 0.0)
        assert np.isfinite(win.rel_width)

    def test_off_grid_quality_rejected(self, baseline_solution):
        _, closed = baseline_solution
        with pytest.raises(ValueError):
            open_source_window(closed, 101.7)

    def test_non_contiguous_region_flagged(self, baseline_solution):
        _, closed = baseline_solution
        corrupted = copy.copy(closed)
        corrupted.decision = closed.decision.copy()
        j = int(np.argmin(np.abs(closed.q_grid - 100.0)))
        corrupted.decision[j, j] = KEEP_CLOSED       # hole at the bottom of the window
        win = open_source_window(corrupted, 100.0)
        assert not win.contiguous


class TestSweeps:
    def test_qb_sweep_single_solve(self, baseline_params, baseline_grid):
        res = sweep_qb([50.0, 100.0, 150.0], baseline_params, baseline_grid)
        widths = [w.abs_width for w in res.windows]
        assert np.all(np.diff(widths) >= 0.0)
        assert res.parameter == "q_b"
        assert np.all(np.diff(res.values) > 0)

    def test_firm_size_sweep_small_grid(self, small_grid):
        res = sweep_firm_size([0.1, 0.3], P, small_grid, 60.0)
        assert len(res.windows) == 2
        assert res.parameter == "m"
        assert all("closed_iterations" in d for d in res.diagnostics)

    def test_phi_sweep_small_grid(self, small_grid):
        res = sweep_phi([0.1, 0.5], P, small_grid, 60.0)
        assert len(res.windows) == 2
        assert res.windows[0].abs_width <= res.windows[1].abs_width


class TestPhiValueCrossing:
    def test_identical_phis_rejected(self, small_grid):
        with pytest.raises(ValueError):
            phi_value_crossing(P, small_grid, 60.0, 0.5, 0.5)

    def test_higher_phi_dominates_at_low_lead(self, small_grid):
        crossing, low, high = phi_value_crossing(P, small_grid, 60.0, 0.1, 0.5)
        assert high[0] > low[0]
        if crossing is not None:
            assert crossing > 60.0


class TestDevelopmentValue:
    def test_prohibitive_cost(self, baseline_solution):
        v_open, closed = baseline_solution
        expensive = replace(P, c_dev=1e6)
        dev = development_value(100.0, v_open, closed, expensive)
        assert dev.expected_value < 0

    def test_quadrature_convergence(self, baseline_solution):
        v_open, closed = baseline_solution
        a = development_value(100.0, v_open, closed, P, n_quadrature=101)
        b = development_value(100.0, v_open, closed, P, n_quadrature=201)
        assert abs(a.expected_value - b.expected_value) < 1e-4 * abs(a.expected_value)

    def test_clamped_draws_counted(self, baseline_solution):
        v_open, closed = baseline_solution
        # lambda**1 * 200 = 1000 > q_max, so top draws must clamp
        dev = development_value(200.0, v_open, closed, P)
        assert dev.n_clamped_nodes > 0

    def test_rejects_too_few_nodes(self, baseline_solution):
        v_open, closed = baseline_solution
        with pytest.raises(ValueError):
            development_value(100.0, v_open, closed, P, n_quadrature=1)


class TestAuditPropositions:
    def test_clean_at_baseline(self, baseline_solution):
        v_open, closed = baseline_solution
        report = audit_propositions(closed, v_open, P)
        assert report.clean
        assert report.n_states_checked > 0

    def test_detects_corrupted_decisions(self, baseline_solution):
        v_open, closed = baseline_solution
        corrupted = copy.copy(closed)
        corrupted.decision = closed.decision.copy()
        bad = [(90, 10), (60, 40)]
        for i, j in bad:
            corrupted.decision[i, j] = (
                KEEP_CLOSED if corrupted.decision[i, j] == OPEN_SOURCE else OPEN_SOURCE
            )
        report = audit_propositions(corrupted, v_open, P)
        coords = {(qa, qb) for qa, qb, _ in report.threshold_violations}
        q = closed.q_grid
        for i, j in bad:
            assert (q[i], q[j]) in coords

    def test_window_agrees_with_audit(self, baseline_solution):
        v_open, closed = baseline_solution
        report = audit_propositions(closed, v_open, P)
        assert report.clean
        for qb in (0.0, 50.0, 100.0, 250.0, 500.0):
            assert open_source_window(closed, qb).contiguous


class TestModelValue:
    def test_is_pointwise_max(self, baseline_solution):
        v_open, closed = baseline_solution
        v = model_value(v_open, closed, 100.0)
        j = int(np.argmin(np.abs(closed.q_grid - 100.0)))
        np.testing.assert_array_equal(v, np.maximum(v_open.value, closed.value[:, j]))
