"""Closed-form static relations of the two-model economy.

Every function here is pure and accepts scalars or numpy arrays. Producer
locations live on [0, 1] with positions below ``m`` internal to the firm;
model qualities are nonnegative. Conventions for degenerate inputs:
zero quality means zero compute and zero profit, and a zero license price
means open access (demand equal to the full external mass, zero revenue).
"""
from __future__ import annotations

import numpy as np

from .params import EconParams


def optimal_compute(x, q, p: EconParams):
    """Profit-maximizing compute for a producer at location ``x`` using a
    model of quality ``q``: ``(alpha * exp(-gamma x) * q**alpha)**(1/(1-alpha))``."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("producer location x must lie in [0, 1]")
    if np.any(q < 0.0):
        raise ValueError("quality q must be nonnegative")
    k = (p.alpha * np.exp(-p.gamma * x) * q ** p.alpha) ** (1.0 / (1.0 - p.alpha))
    return k[()] if k.ndim == 0 else k


def producer_profit(x, q, k, price, p: EconParams):
    """Per-producer profit ``exp(-gamma x) (q k)**alpha - k - price``."""
    x = np.asarray(x, dtype=float)
    q = np.asarray(q, dtype=float)
    k = np.asarray(k, dtype=float)
    out = np.exp(-p.gamma * x) * (q * k) ** p.alpha - k - price
    return out[()] if out.ndim == 0 else out


def indifference_price(x, q_a, q_b, p: EconParams):
    """License fee making the producer at ``x`` indifferent between the
    closed model of quality ``q_a`` and the free rival of quality ``q_b``.

    Requires ``q_a >= q_b``; willingness to pay is undefined otherwise.
    """
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    if np.any(q_a < q_b):
        raise ValueError("indifference price requires q_a >= q_b")
    e = p.alpha / (1.0 - p.alpha)
    scale = ((1.0 - p.alpha) / p.alpha) * (p.alpha * np.exp(-p.gamma * np.asarray(x, dtype=float))) ** (1.0 / (1.0 - p.alpha))
    out = scale * (q_a ** e - q_b ** e)
    return out[()] if out.ndim == 0 else out


def api_demand(q_a, q_b, price, p: EconParams, clamp: bool = True):
    """Mass of external producers buying API access at the given price.

    Inverts the location of the marginal adopter and subtracts the internal
    mass ``m``. With ``clamp`` the result is restricted to the physical
    range [0, 1 - m]; without it the raw (possibly infinite) value is
    returned, which is useful for monotonicity checks. A zero price means
    open access: demand is the full external mass ``1 - m``.
    """
    q_a = np.asarray(q_a, dtype=float)
    q_b = np.asarray(q_b, dtype=float)
    price = np.asarray(price, dtype=float)
    if np.any(q_a < q_b):
        raise ValueError("api demand requires q_a >= q_b")
    if np.any(price < 0.0):
        raise ValueError("price must be nonnegative")
    e = p.alpha / (1.0 - p.alpha)
    lead = q_a ** e - q_b ** e
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (1.0 / p.gamma) * (
            np.log(p.alpha * lead ** (1.0 - p.alpha))
            - (1.0 - p.alpha) * np.log(p.alpha * price / (1.0 - p.alpha))
        ) - p.m
    raw = np.where(lead <= 0.0, -np.inf, raw)
    raw = np.where(price == 0.0, np.inf, raw)
    out = np.clip(raw, 0.0, 1.0 - p.m) if clamp else raw
    return out[()] if out.ndim == 0 else out


def marginal_adopter(q_a, q_b, price, p: EconParams):
    """Location of the last producer buying the API, ``m`` plus clamped demand."""
    out = p.m + api_demand(q_a, q_b, price, p, clamp=True)
    return out


def api_profit(q_a, q_b, price, p: EconParams):
    """API revenue: price times (clamped) demand; zero at a zero price."""
    price = np.asarray(price, dtype=float)
    out = np.where(price == 0.0, 0.0, price * api_demand(q_a, q_b, price, p, clamp=True))
    return out[()] if out.ndim == 0 else out


def theta(p: EconParams) -> float:
    """Constant collapsing the per-producer profit integral into the
    aggregate form ``theta * (q K)**alpha - K``."""
    s = (1.0 - np.exp(-p.gamma * p.m / (1.0 - p.alpha))) ** (1.0 - p.alpha)
    return float(s / (p.gamma / (1.0 - p.alpha)) ** (1.0 - p.alpha))


def firm_profit(q, k_total, p: EconParams):
    """Aggregate internal production profit ``theta * (q K)**alpha - K``."""
    q = np.asarray(q, dtype=float)
    k_total = np.asarray(k_total, dtype=float)
    out = theta(p) * (q * k_total) ** p.alpha - k_total
    return out[()] if out.ndim == 0 else out


def static_optimal_compute(q, p: EconParams):
    """Aggregate compute maximizing the one-period internal profit,
    ``(alpha * theta * q**alpha)**(1/(1-alpha))``."""
    q = np.asarray(q, dtype=float)
    out = (p.alpha * theta(p) * q ** p.alpha) ** (1.0 / (1.0 - p.alpha))
    return out[()] if out.ndim == 0 else out


def external_compute_open(q, p: EconParams):
    """Aggregate optimal compute of external producers ``x in (m, 1]`` all
    using an open model of quality ``q`` (closed form of the location
    integral of :func:`optimal_compute`)."""
    return external_compute_b(q, p.m, p)


def external_compute_b(q_b, adopter_cut, p: EconParams):
    """Aggregate optimal compute of producers in ``(adopter_cut, 1]`` using
    the open model of quality ``q_b``."""
    q_b = np.asarray(q_b, dtype=float)
    cut = np.asarray(adopter_cut, dtype=float)
    if np.any(cut < p.m - 1e-12) or np.any(cut > 1.0 + 1e-12):
        raise ValueError("adopter cut must lie in [m, 1]")
    r = p.gamma / (1.0 - p.alpha)
    out = (
        (p.alpha * q_b ** p.alpha) ** (1.0 / (1.0 - p.alpha))
        * ((1.0 - p.alpha) / p.gamma)
        * (np.exp(-r * cut) - np.exp(-r))
    )
    out = np.maximum(out, 0.0)
    return out[()] if out.ndim == 0 else out
