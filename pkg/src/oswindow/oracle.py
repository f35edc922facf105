"""Brute-force validators used only in tests.

Finite-horizon backward induction with naive exhaustive search over the
control grids, plus per-producer quadrature of the internal profit
integral. These share the static profit formulas with the main solver but
none of its optimization code, and they always use nearest-node
continuation; equivalence tests switch the main solver to the same mode.
Single-threaded and restricted to tiny grids by design.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .economics import (
    api_demand,
    external_compute_b,
    external_compute_open,
    firm_profit,
    indifference_price,
    producer_profit,
)
from .params import EconParams, GridSpec
from .solver import OpenSolution, adaptive_k_max

MAX_NQ = 21
MAX_NK = 20


@dataclass(frozen=True)
class FiniteHorizonSpec:
    """Backward-induction horizon and terminal condition.

    For equivalence tests pick ``horizon`` so the discarded tail
    ``beta**T * max flow / (1 - beta)`` is below the comparison tolerance.
    """

    horizon: int
    terminal: Optional[Callable[[float], float]] = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")


def _check_grid(grid: GridSpec, n_k: int) -> None:
    if grid.n_q > MAX_NQ or n_k > MAX_NK:
        raise ValueError(
            f"oracle limited to n_q <= {MAX_NQ} and n_k <= {MAX_NK}, "
            f"got n_q={grid.n_q}, n_k={n_k}"
        )


def _nearest(q_grid: np.ndarray, q: float) -> int:
    dq = q_grid[1] - q_grid[0]
    idx = int(np.floor((q - q_grid[0]) / dq + 0.5))
    return min(max(idx, 0), len(q_grid) - 1)


def finite_horizon_open(p: EconParams, grid: GridSpec, spec: FiniteHorizonSpec) -> np.ndarray:
    """Exact backward induction for the open model on a tiny grid."""
    _check_grid(grid, grid.n_k_open)
    q = grid.q_grid
    kg = grid.k_grid_open
    if spec.terminal is None:
        value = np.zeros(len(q))
    else:
        value = np.array([spec.terminal(qi) for qi in q], dtype=float)
    for _ in range(spec.horizon):
        new = np.empty_like(value)
        for i, qi in enumerate(q):
            k_ext = float(external_compute_open(qi, p))
            best = -np.inf
            for k in kg:
                q_next = qi + p.psi * k + p.phi * k_ext
                if q_next > grid.q_max:
                    q_next = grid.q_max
                cand = float(firm_profit(qi, k, p)) + p.beta * value[_nearest(q, q_next)]
                if cand > best:
                    best = cand
            new[i] = best
        value = new
    return value


def finite_horizon_closed(
    p: EconParams, grid: GridSpec, v_open: OpenSolution, spec: FiniteHorizonSpec
) -> np.ndarray:
    """Exact backward induction for the closed model, embedding the
    open/closed continuation choice and the switch option below the
    diagonal. ``v_open`` supplies the (fixed) open values on the same grid."""
    _check_grid(grid, grid.n_k_closed)
    q = grid.q_grid
    n = len(q)
    kg = np.linspace(0.0, adaptive_k_max(grid.q_max, p, grid), grid.n_k_closed)
    vo = np.asarray(v_open.value, dtype=float)

    if spec.terminal is None:
        value = np.zeros((n, n))
    else:
        value = np.array([[spec.terminal(qa, qb) for qb in q] for qa in q], dtype=float)

    for _ in range(spec.horizon):
        new = np.empty_like(value)
        for i in range(n):
            for j in range(n):
                qa, qb = q[i], q[j]
                if qa >= qb:
                    cap = float(indifference_price(p.m, qa, qb, p))
                    pg = np.linspace(0.0, cap, grid.n_p + 1)
                else:
                    pg = np.zeros(grid.n_p + 1)
                best = -np.inf
                for k in kg:
                    q_next = min(qa + p.psi * k, grid.q_max)
                    ii = _nearest(q, q_next)
                    base = float(firm_profit(qa, k, p))
                    for price in pg:
                        if qa >= qb:
                            demand = float(api_demand(qa, qb, price, p, clamp=True))
                            revenue = price * demand if price > 0.0 else 0.0
                            kb = float(external_compute_b(qb, min(p.m + demand, 1.0), p))
                        else:
                            revenue = 0.0
                            kb = float(external_compute_open(qb, p))
                        qb_next = min(qb + p.phi * kb, grid.q_max)
                        jj = _nearest(q, qb_next)
                        cont = max(vo[ii], value[ii, jj])
                        cand = base + revenue + p.beta * cont
                        if cand > best:
                            best = cand
                if i < j:
                    sval = vo[j] - p.c_switch * qb
                    if sval > best:
                        best = sval
                new[i, j] = best
        value = new
    return value


def per_producer_profit_quadrature(q: float, k_alloc, p: EconParams, n_x: int = 1000) -> float:
    """Trapezoid quadrature of the firm's internal profit integral over
    producer locations [0, m] for an arbitrary compute profile ``k_alloc``."""
    x = np.linspace(0.0, p.m, n_x)
    k = np.asarray([float(k_alloc(xi)) for xi in x])
    if np.any(k < 0.0):
        raise ValueError("compute allocation must be nonnegative")
    integrand = producer_profit(x, q, k, 0.0, p)
    return float(np.trapezoid(integrand, x))
