"""Value function iteration for the open- and closed-model Bellman problems.

The open problem is one-dimensional in own quality; the closed problem lives
on the (q_A, q_B) product grid with compute and a state-specific price grid
as controls and an embedded open / keep-closed / switch discrete choice.
The closed-model sweep is compiled with numba; each state writes only its
own slot, so results are independent of the number of threads.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .economics import (
    api_demand,
    external_compute_b,
    external_compute_open,
    firm_profit,
    indifference_price,
    static_optimal_compute,
)
from .params import EconParams, GridSpec

KEEP_CLOSED = 0
OPEN_SOURCE = 1
SWITCH_TO_B = 2
DECISION_LABELS = {KEEP_CLOSED: "keep-closed", OPEN_SOURCE: "open-source", SWITCH_TO_B: "switch-to-B"}

INTERPOLATION_MODES = ("linear", "nearest")


class ConvergenceError(RuntimeError):
    """Raised when a solve fails to reach tolerance within the iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class PolicySaturationWarning(UserWarning):
    """A converged compute policy sits at the top of its control grid."""


def interpolate_value(table: np.ndarray, q_grid: np.ndarray, q, mode: str = "linear"):
    """Evaluate a value table at (possibly off-grid) qualities.

    Piecewise-linear by default, exact at grid nodes; ``mode='nearest'``
    snaps to the closest node for strict grid replication. Out-of-range
    qualities are rejected: callers clamp transitions first.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < q_grid[0] - 1e-12) or np.any(q > q_grid[-1] + 1e-12):
        raise ValueError("quality outside the grid range; clamp before interpolating")
    if mode == "linear":
        out = np.interp(q, q_grid, table)
    elif mode == "nearest":
        dq = q_grid[1] - q_grid[0]
        idx = np.clip(np.floor((q - q_grid[0]) / dq + 0.5).astype(int), 0, len(q_grid) - 1)
        out = np.asarray(table)[idx]
    else:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    return out[()] if np.ndim(out) == 0 else out


def adaptive_k_max(q_max: float, p: EconParams, grid: GridSpec) -> float:
    """Upper bound of the closed-model compute grid: a fixed multiple of the
    static optimal aggregate compute at the top of the quality grid."""
    return grid.k_adapt_factor * float(static_optimal_compute(q_max, p))


def _interp_coords(q_values: np.ndarray, q_grid: np.ndarray, mode: str):
    """Lower-node indices and weights encoding both interpolation modes.

    Nearest mode is encoded with weights in {0, 1} so a single bilinear
    kernel serves both; indices are capped at n-2 so idx+1 stays valid.
    """
    n = len(q_grid)
    dq = q_grid[1] - q_grid[0]
    pos = (q_values - q_grid[0]) / dq
    if mode == "linear":
        idx = np.clip(np.floor(pos).astype(np.int64), 0, n - 2)
        w = pos - idx
    elif mode == "nearest":
        near = np.clip(np.floor(pos + 0.5).astype(np.int64), 0, n - 1)
        idx = np.minimum(near, n - 2)
        w = (near - idx).astype(float)
    else:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    return idx, np.clip(w, 0.0, 1.0)


@dataclass
class OpenSolution:
    """Converged value and compute policy for the open-sourced model."""

    q_grid: np.ndarray
    value: np.ndarray
    policy_k: np.ndarray
    iterations: int
    residual: float
    residual_history: np.ndarray
    n_clamped: int
    params: EconParams
    grid: GridSpec
    interpolation: str


@dataclass
class ClosedSolution:
    """Converged value, policies and decision map for the closed model."""

    q_grid: np.ndarray
    value: np.ndarray          # (n_q, n_q), rows index q_A, columns q_B
    policy_k: np.ndarray
    policy_p: np.ndarray
    decision: np.ndarray       # int8 tags, see DECISION_LABELS
    cont_open: np.ndarray      # True where the chosen continuation branch is the open value
    iterations: int
    residual: float
    residual_history: np.ndarray
    n_clamped: int
    params: EconParams
    grid: GridSpec
    interpolation: str
    price_cap: np.ndarray = field(repr=False, default=None)  # per-state top of the price grid


def bellman_open(value_in, q: float, p: EconParams, grid: GridSpec):
    """One Bellman update for the open model at a single quality.

    Maximizes current internal profit plus the discounted continuation at
    ``q' = q + psi K + phi K_ext`` (clamped at the grid top) over the
    compute grid. ``value_in`` is any callable defined on the quality range.
    """
    kg = grid.k_grid_open
    q_next = np.minimum(q + p.psi * kg + p.phi * external_compute_open(q, p), grid.q_max)
    cand = firm_profit(q, kg, p) + p.beta * np.asarray([value_in(qn) for qn in q_next])
    best = int(np.argmax(cand))
    return float(cand[best]), float(kg[best])


def solve_open(
    p: EconParams,
    grid: GridSpec,
    tol: float = 1e-6,
    max_iter: int = 10000,
    interpolation: str = "linear",
) -> OpenSolution:
    """Iterate the open-model Bellman operator to its fixed point."""
    if interpolation not in INTERPOLATION_MODES:
        raise ValueError(f"unknown interpolation mode {interpolation!r}")
    q = grid.q_grid
    kg = grid.k_grid_open
    flow = firm_profit(q[:, None], kg[None, :], p)
    q_next_raw = q[:, None] + p.psi * kg[None, :] + p.phi * external_compute_open(q, p)[:, None]
    q_next = np.minimum(q_next_raw, grid.q_max)
    clamped = q_next_raw > grid.q_max
    idx, w = _interp_coords(q_next, q, interpolation)

    value = np.zeros_like(q)
    history = []
    for it in range(1, max_iter + 1):
        cont = (1.0 - w) * value[idx] + w * value[idx + 1]
        cand = flow + p.beta * cont
        new_value = cand.max(axis=1)
        residual = float(np.max(np.abs(new_value - value)))
        history.append(residual)
        value = new_value
        if residual <= tol:
            break
    else:
        raise ConvergenceError("open-model VFI did not converge", residual, max_iter)

    cont = (1.0 - w) * value[idx] + w * value[idx + 1]
    policy_idx = np.argmax(flow + p.beta * cont, axis=1)
    policy_k = kg[policy_idx]
    n_clamped = int(clamped[np.arange(len(q)), policy_idx].sum())
    if np.any(policy_idx == len(kg) - 1):
        warnings.warn(
            "open-model compute policy saturates the control grid upper bound",
            PolicySaturationWarning,
            stacklevel=2,
        )
    return OpenSolution(
        q_grid=q, value=value, policy_k=policy_k, iterations=it, residual=residual,
        residual_history=np.asarray(history), n_clamped=n_clamped,
        params=p, grid=grid, interpolation=interpolation,
    )


@njit(parallel=True, cache=True)
def _closed_sweep(vc, flow, v_open_next, ia, wa, rev, jb, wb, beta, switch_val, n_q, n_k, n_p1):
    """One parallel Bellman sweep over all (q_A, q_B) states.

    Reads only the previous-iteration table ``vc``; each state writes its
    own output slot, so the sweep is deterministic under any thread count.
    Ties in the discrete choice resolve to the open continuation and to the
    lowest control indices.
    """
    vc_new = np.empty((n_q, n_q))
    pol_k = np.zeros((n_q, n_q), dtype=np.int64)
    pol_p = np.zeros((n_q, n_q), dtype=np.int64)
    cont_open = np.zeros((n_q, n_q), dtype=np.uint8)
    switched = np.zeros((n_q, n_q), dtype=np.uint8)
    for s in prange(n_q * n_q):
        i = s // n_q
        j = s % n_q
        best = -1.0e300
        bk = 0
        bp = 0
        bc = 0
        for k in range(n_k):
            base = flow[i, k]
            von = v_open_next[i, k]
            ii = ia[i, k]
            ww = wa[i, k]
            for pp in range(n_p1):
                jj = jb[i, j, pp]
                wwb = wb[i, j, pp]
                vcn = (1.0 - ww) * ((1.0 - wwb) * vc[ii, jj] + wwb * vc[ii, jj + 1]) + ww * (
                    (1.0 - wwb) * vc[ii + 1, jj] + wwb * vc[ii + 1, jj + 1]
                )
                if von >= vcn:
                    cont = von
                    c = 1
                else:
                    cont = vcn
                    c = 0
                total = base + rev[i, j, pp] + beta * cont
                if total > best:
                    best = total
                    bk = k
                    bp = pp
                    bc = c
        if i < j and switch_val[j] > best:
            best = switch_val[j]
            bk = 0
            bp = 0
            bc = 0
            switched[i, j] = 1
        vc_new[i, j] = best
        pol_k[i, j] = bk
        pol_p[i, j] = bp
        cont_open[i, j] = bc
    return vc_new, pol_k, pol_p, cont_open, switched


def _closed_precompute(v_open: OpenSolution, p: EconParams, grid: GridSpec, interpolation: str):
    """State- and control-dependent arrays that are constant across iterations."""
    q = grid.q_grid
    n = grid.n_q
    k_top = adaptive_k_max(grid.q_max, p, grid)
    kg = np.linspace(0.0, k_top, grid.n_k_closed)

    flow = firm_profit(q[:, None], kg[None, :], p)
    qa_next_raw = q[:, None] + p.psi * kg[None, :]
    qa_next = np.minimum(qa_next_raw, grid.q_max)
    clamped_a = qa_next_raw > grid.q_max
    ia, wa = _interp_coords(qa_next, q, interpolation)
    vo = interpolate_value(v_open.value, q, qa_next.ravel(), interpolation).reshape(qa_next.shape)

    # Price grid per state: n_p equal segments from 0 to the willingness to
    # pay of the producer at x = m; zero everywhere on or below the diagonal.
    price_cap = np.zeros((n, n))
    iu = np.triu_indices(n)  # (j, i) pairs with j <= i once transposed
    price_cap[iu[1], iu[0]] = indifference_price(p.m, q[iu[1]], q[iu[0]], p)
    seg = np.linspace(0.0, 1.0, grid.n_p + 1)
    prices = price_cap[:, :, None] * seg[None, None, :]

    demand = np.zeros_like(prices)
    qa3 = np.broadcast_to(q[:, None, None], prices.shape)
    qb3 = np.broadcast_to(q[None, :, None], prices.shape)
    upper = qa3 >= qb3
    demand[upper] = api_demand(qa3[upper], qb3[upper], prices[upper], p, clamp=True)
    rev = prices * demand
    cut = p.m + demand
    kb = external_compute_b(qb3, np.clip(cut, p.m, 1.0), p)
    # Below the diagonal nobody buys the API: every external producer uses B.
    kb[~upper] = np.broadcast_to(external_compute_open(q, p)[None, :, None], prices.shape)[~upper]
    rev[~upper] = 0.0
    qb_next_raw = qb3 + p.phi * kb
    qb_next = np.minimum(qb_next_raw, grid.q_max)
    jbq, wb = _interp_coords(qb_next, q, interpolation)

    switch_val = interpolate_value(v_open.value, q, q, interpolation) - p.c_switch * q
    return kg, flow, vo, ia, wa, clamped_a, prices, price_cap, rev, jbq, wb, switch_val


def solve_closed(
    v_open: OpenSolution,
    p: EconParams,
    grid: GridSpec,
    tol: float = 1e-6,
    max_iter: int = 10000,
    interpolation: str = "linear",
) -> ClosedSolution:
    """Iterate the closed-model Bellman operator over the (q_A, q_B) grid.

    ``v_open`` must be a converged open-model solution on the same quality
    grid; it enters both the continuation discrete choice and the switch
    option available where q_A < q_B.
    """
    if interpolation not in INTERPOLATION_MODES:
        raise ValueError(f"unknown interpolation mode {interpolation!r}")
    if not np.array_equal(v_open.q_grid, grid.q_grid):
        raise ValueError("open solution was computed on a different quality grid")
    q = grid.q_grid
    n = grid.n_q
    (kg, flow, vo_next, ia, wa, clamped_a, prices, price_cap, rev, jbq, wb, switch_val) = _closed_precompute(
        v_open, p, grid, interpolation
    )

    value = np.zeros((n, n))
    history = []
    for it in range(1, max_iter + 1):
        new_value, pol_k, pol_p, cont_open, switched = _closed_sweep(
            value, flow, vo_next, ia, wa, rev, jbq, wb, p.beta, switch_val,
            n, grid.n_k_closed, grid.n_p + 1,
        )
        residual = float(np.max(np.abs(new_value - value)))
        history.append(residual)
        value = new_value
        if residual <= tol:
            break
    else:
        raise ConvergenceError("closed-model VFI did not converge", residual, max_iter)

    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    policy_k = kg[pol_k]
    policy_p = prices[rows, cols, pol_p]
    n_clamped = int(clamped_a[rows, pol_k].sum())
    if np.any(pol_k == len(kg) - 1):
        warnings.warn(
            "closed-model compute policy saturates the adaptive control bound",
            PolicySaturationWarning,
            stacklevel=2,
        )

    decision = np.full((n, n), KEEP_CLOSED, dtype=np.int8)
    decision[switched.astype(bool)] = SWITCH_TO_B
    decision[v_open.value[:, None] >= value] = OPEN_SOURCE

    return ClosedSolution(
        q_grid=q, value=value, policy_k=policy_k, policy_p=policy_p,
        decision=decision, cont_open=cont_open.astype(bool),
        iterations=it, residual=residual, residual_history=np.asarray(history),
        n_clamped=n_clamped, params=p, grid=grid, interpolation=interpolation,
        price_cap=price_cap,
    )


def bellman_closed(
    v_open: OpenSolution,
    value_in,
    state: tuple,
    p: EconParams,
    grid: GridSpec,
    interpolation: str = "linear",
):
    """Reference single-state Bellman update for the closed model.

    Mirrors the compiled sweep: joint maximization over the compute grid and
    the state-specific price grid, with the open/closed continuation choice
    at ``(q', q_B')`` and, where q_A < q_B, the option of switching to the
    rival open model at cost ``c_switch * q_B``. ``value_in`` is a callable
    of (q_a, q_b). Returns (value, k, price, decision label).
    """
    q_a, q_b = state
    q = grid.q_grid
    kg = np.linspace(0.0, adaptive_k_max(grid.q_max, p, grid), grid.n_k_closed)
    if q_a >= q_b:
        cap = float(indifference_price(p.m, q_a, q_b, p))
        pg = np.linspace(0.0, cap, grid.n_p + 1)
    else:
        pg = np.zeros(grid.n_p + 1)

    best, best_k, best_p = -np.inf, 0.0, 0.0
    for k in kg:
        q_next = min(q_a + p.psi * k, grid.q_max)
        von = float(interpolate_value(v_open.value, q, q_next, interpolation))
        base = float(firm_profit(q_a, k, p))
        for price in pg:
            if q_a >= q_b:
                demand = float(api_demand(q_a, q_b, price, p, clamp=True))
                revenue = price * demand if price > 0.0 else 0.0
                cut = min(max(p.m + demand, p.m), 1.0)
                kb = float(external_compute_b(q_b, cut, p))
            else:
                revenue = 0.0
                kb = float(external_compute_open(q_b, p))
            qb_next = min(q_b + p.phi * kb, grid.q_max)
            cont = max(von, float(value_in(q_next, qb_next)))
            total = base + revenue + p.beta * cont
            if total > best:
                best, best_k, best_p = total, float(k), float(price)

    switched = False
    if q_a < q_b:
        sval = float(interpolate_value(v_open.value, q, q_b, interpolation)) - p.c_switch * q_b
        if sval > best:
            best, best_k, best_p = sval, 0.0, 0.0
            switched = True

    v_open_here = float(interpolate_value(v_open.value, q, q_a, interpolation))
    if v_open_here >= best:
        tag = DECISION_LABELS[OPEN_SOURCE]
    elif switched:
        tag = DECISION_LABELS[SWITCH_TO_B]
    else:
        tag = DECISION_LABELS[KEEP_CLOSED]
    return best, best_k, best_p, tag
