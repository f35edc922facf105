"""Headline results extracted from converged solutions.

Open-source windows per rival quality, parameter sweeps over firm size and
ecosystem efficiency, the ex-ante development decision, and audits of the
threshold and price-cap properties of the solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .economics import api_demand
from .params import EconParams, GridSpec
from .solver import (
    ClosedSolution,
    OPEN_SOURCE,
    OpenSolution,
    SWITCH_TO_B,
    interpolate_value,
    solve_closed,
    solve_open,
)


@dataclass(frozen=True)
class WindowResult:
    """Open-source window at one rival quality.

    ``q_star`` is the largest own quality at which the decision is still to
    open source (``q_b`` itself if the window is empty). ``contiguous`` is
    False when the open-source region along q_A >= q_b is not an initial
    segment, which breaks the threshold characterization.
    """

    q_b: float
    q_star: float
    abs_width: float
    rel_width: float
    contiguous: bool = True


@dataclass(frozen=True)
class DevelopmentResult:
    """Expected value of developing a new model against rival quality q_b."""

    q_b: float
    expected_value: float
    n_quadrature: int
    n_clamped_nodes: int = 0


@dataclass
class SweepResult:
    """Per-parameter-value window results with solver diagnostics."""

    parameter: str
    values: np.ndarray
    windows: list
    diagnostics: list = field(default_factory=list)


@dataclass
class AuditReport:
    """Violation counts and coordinates for the two solution properties."""

    threshold_violations: list   # (q_a, q_b, detail) for threshold/contiguity failures
    price_violations: list       # (q_a, q_b, detail) for price-cap failures
    n_states_checked: int

    @property
    def clean(self) -> bool:
        return not self.threshold_violations and not self.price_violations


def _grid_index(q_grid: np.ndarray, q: float) -> int:
    j = int(np.argmin(np.abs(q_grid - q)))
    if abs(q_grid[j] - q) > 1e-9 * max(1.0, abs(q)):
        raise ValueError(f"quality {q} is not on the solution grid")
    return j


def open_source_window(closed: ClosedSolution, q_b: float) -> WindowResult:
    """Scan the decision map along q_A >= q_b for the open-source threshold."""
    q = closed.q_grid
    j = _grid_index(q, q_b)
    open_mask = closed.decision[j:, j] == OPEN_SOURCE
    if not open_mask.any():
        return WindowResult(q_b=float(q[j]), q_star=float(q[j]), abs_width=0.0, rel_width=0.0)
    last = int(np.max(np.nonzero(open_mask)[0]))
    contiguous = bool(open_mask[: last + 1].all())
    q_star = float(q[j + last])
    abs_width = q_star - float(q[j])
    rel_width = abs_width / q_b if q_b > 0 else 0.0
    return WindowResult(q_b=float(q[j]), q_star=q_star, abs_width=abs_width,
                        rel_width=rel_width, contiguous=contiguous)


def _solve_and_window(p: EconParams, grid: GridSpec, q_b: float, tol: float, max_iter: int,
                      interpolation: str):
    v_open = solve_open(p, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
    closed = solve_closed(v_open, p, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
    win = open_source_window(closed, q_b)
    diag = {
        "open_iterations": v_open.iterations, "open_residual": v_open.residual,
        "closed_iterations": closed.iterations, "closed_residual": closed.residual,
        "closed_clamped": closed.n_clamped,
    }
    return win, diag


def sweep_firm_size(m_values, p: EconParams, grid: GridSpec, q_b: float,
                    tol: float = 1e-6, max_iter: int = 10000,
                    interpolation: str = "linear") -> SweepResult:
    """Window width per firm size; each point is a full re-solve."""
    m_values = np.asarray(sorted(m_values), dtype=float)
    windows, diags = [], []
    for m in m_values:
        win, diag = _solve_and_window(replace(p, m=float(m)), grid, q_b, tol, max_iter, interpolation)
        windows.append(win)
        diags.append(diag)
    return SweepResult(parameter="m", values=m_values, windows=windows, diagnostics=diags)


def sweep_phi(phi_values, p: EconParams, grid: GridSpec, q_b: float,
              tol: float = 1e-6, max_iter: int = 10000,
              interpolation: str = "linear") -> SweepResult:
    """Window width per open-source ecosystem efficiency."""
    phi_values = np.asarray(sorted(phi_values), dtype=float)
    windows, diags = [], []
    for phi in phi_values:
        win, diag = _solve_and_window(replace(p, phi=float(phi)), grid, q_b, tol, max_iter, interpolation)
        windows.append(win)
        diags.append(diag)
    return SweepResult(parameter="phi", values=phi_values, windows=windows, diagnostics=diags)


def sweep_qb(qb_values, p: EconParams, grid: GridSpec,
             tol: float = 1e-6, max_iter: int = 10000,
             interpolation: str = "linear") -> SweepResult:
    """Absolute and relative window width per rival quality.

    Rival quality is a state, not a structural parameter, so a single solve
    covers every point of the sweep.
    """
    qb_values = np.asarray(sorted(qb_values), dtype=float)
    v_open = solve_open(p, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
    closed = solve_closed(v_open, p, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
    diag = {
        "open_iterations": v_open.iterations, "closed_iterations": closed.iterations,
        "closed_residual": closed.residual,
    }
    windows = [open_source_window(closed, float(qb)) for qb in qb_values]
    return SweepResult(parameter="q_b", values=qb_values, windows=windows,
                       diagnostics=[diag] * len(windows))


def model_value(v_open: OpenSolution, closed: ClosedSolution, q_b: float) -> np.ndarray:
    """max of the open and closed values along own quality at a fixed rival quality."""
    j = _grid_index(closed.q_grid, q_b)
    return np.maximum(v_open.value, closed.value[:, j])


def phi_value_crossing(p: EconParams, grid: GridSpec, q_b: float,
                       phi_low: float, phi_high: float,
                       tol: float = 1e-6, max_iter: int = 10000,
                       interpolation: str = "linear"):
    """Smallest grid quality >= q_b where the model value under ``phi_low``
    exceeds the value under ``phi_high``; None when no crossing exists.

    Returns (crossing quality or None, value curve under phi_low, value
    curve under phi_high), curves over q_A >= q_b.
    """
    if not phi_low < phi_high:
        raise ValueError("phi_low must be below phi_high")
    curves = {}
    for phi in (phi_low, phi_high):
        pp = replace(p, phi=float(phi))
        v_open = solve_open(pp, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
        closed = solve_closed(v_open, pp, grid, tol=tol, max_iter=max_iter, interpolation=interpolation)
        curves[phi] = model_value(v_open, closed, q_b)
    j = _grid_index(grid.q_grid, q_b)
    low, high = curves[phi_low][j:], curves[phi_high][j:]
    above = np.nonzero(low > high)[0]
    crossing = float(grid.q_grid[j + above[0]]) if above.size else None
    return crossing, low, high


def development_value(q_b: float, v_open: OpenSolution, closed: ClosedSolution,
                      p: EconParams, n_quadrature: int = 101) -> DevelopmentResult:
    """Expected value of developing a new model given rival quality q_b.

    The draw quality is ``lambda**u * q_b`` with u uniform on [0, 1];
    the expectation uses deterministic trapezoid quadrature over u, the
    realized value is the better of opening and keeping closed, and the
    development cost is ``c_dev * q_b``. Draws above the grid top are
    clamped and counted.
    """
    if n_quadrature < 2:
        raise ValueError("n_quadrature must be at least 2")
    q = closed.q_grid
    j = _grid_index(q, q_b)
    u = np.linspace(0.0, 1.0, n_quadrature)
    draws = p.lambda_dev ** u * q_b
    n_clamped = int(np.sum(draws > q[-1] + 1e-12))
    draws = np.clip(draws, q[0], q[-1])
    vo = interpolate_value(v_open.value, q, draws, closed.interpolation)
    vc = interpolate_value(closed.value[:, j], q, draws, closed.interpolation)
    v = np.maximum(vo, vc)
    expected = float(np.trapezoid(v, u)) - p.c_dev * q_b
    return DevelopmentResult(q_b=float(q_b), expected_value=expected,
                             n_quadrature=n_quadrature, n_clamped_nodes=n_clamped)


def _static_price_argmax(closed: ClosedSolution, p: EconParams, i: int, j: int):
    """One-period revenue-maximizing price on the state's own price grid."""
    q = closed.q_grid
    cap = closed.price_cap[i, j]
    pg = np.linspace(0.0, cap, closed.grid.n_p + 1)
    if cap <= 0.0:
        return 0.0, 0.0
    rev = np.where(pg > 0.0, pg * api_demand(q[i], q[j], pg, p, clamp=True), 0.0)
    return float(pg[int(np.argmax(rev))]), float(cap / closed.grid.n_p)


def audit_propositions(closed: ClosedSolution, v_open: OpenSolution, p: EconParams) -> AuditReport:
    """Check the threshold and price-cap properties of a converged solution.

    Threshold: along each rival-quality column the sign of V_closed - V_open
    over q_A >= q_B changes at most once, from negative to positive, and the
    decision map agrees with the value comparison. Price cap: at states
    whose chosen continuation keeps the model closed the price does not
    exceed the one-period revenue maximizer by more than one price-grid
    step; at open-continuation states it equals the maximizer within one
    step. Violations are returned as data, never raised.
    """
    q = closed.q_grid
    n = len(q)
    threshold, price = [], []
    checked = 0

    for j in range(n):
        diff = closed.value[j:, j] - v_open.value[j:]
        keep = diff > 0.0  # ties resolve to open-source
        flips = int(np.sum(keep[1:] != keep[:-1]))
        if flips > 1 or (flips == 1 and keep[0]):
            threshold.append((float(q[j]), float(q[j]), f"sign pattern has {flips} changes"))
        dec = closed.decision[j:, j]
        mism = np.nonzero((diff <= 0.0) != (dec == OPEN_SOURCE))[0]
        for i in mism:
            threshold.append((float(q[j + i]), float(q[j]),
                              "decision map disagrees with the value comparison"))

    for j in range(n):
        for i in range(j, n):
            if closed.decision[i, j] == SWITCH_TO_B:
                continue
            checked += 1
            p_star, step = _static_price_argmax(closed, p, i, j)
            chosen = closed.policy_p[i, j]
            slack = step + 1e-9
            if closed.cont_open[i, j]:
                if abs(chosen - p_star) > slack:
                    price.append((float(q[i]), float(q[j]),
                                  f"open continuation: price {chosen:.6g} != maximizer {p_star:.6g}"))
            else:
                if chosen > p_star + slack:
                    price.append((float(q[i]), float(q[j]),
                                  f"closed continuation: price {chosen:.6g} above cap {p_star:.6g}"))
    return AuditReport(threshold_violations=threshold, price_violations=price,
                       n_states_checked=checked)
