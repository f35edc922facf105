"""Parameter and grid containers for the open-sourcing model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EconParams:
    """Structural parameters of the two-model economy.

    Defaults are the baseline calibration used throughout the analysis.
    """

    beta: float = 0.9          # time discount factor
    gamma: float = 1.0         # AI-compatibility decay rate over producer locations
    alpha: float = 0.45        # production-function curvature
    m: float = 0.2             # firm size: mass of internal producers
    psi: float = 0.5           # efficiency of internal development
    phi: float = 0.5           # efficiency of the open-source ecosystem
    lambda_dev: float = 5.0    # development improvement factor (> 1)
    c_dev: float = 0.4         # development cost per unit of rival quality
    c_switch: float = 0.5      # adjustment cost of switching to the rival open model

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 < self.m < 1.0:
            raise ValueError(f"m must lie in (0, 1), got {self.m}")
        if not 0.0 < self.psi <= 1.0:
            raise ValueError(f"psi must lie in (0, 1], got {self.psi}")
        if not 0.0 < self.phi <= 1.0:
            raise ValueError(f"phi must lie in (0, 1], got {self.phi}")
        if not self.lambda_dev > 1.0:
            raise ValueError(f"lambda_dev must exceed 1, got {self.lambda_dev}")
        if not self.c_dev >= 0.0:
            raise ValueError(f"c_dev must be nonnegative, got {self.c_dev}")
        if not self.c_switch >= 0.0:
            raise ValueError(f"c_switch must be nonnegative, got {self.c_switch}")


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the state and control spaces.

    Defaults: quality on [0, 500] with 101 points, open-model compute on
    [0, 20] with 100 points, a 50-point compute grid and 20-segment price
    grid for the closed model, and 1000 producer-location nodes.
    """

    q_min: float = 0.0
    q_max: float = 500.0
    n_q: int = 101
    k_max_open: float = 20.0
    n_k_open: int = 100
    n_k_closed: int = 50
    k_adapt_factor: float = 2.0   # multiplier on the static optimum for the closed compute bound
    n_p: int = 20                 # number of equal price segments per state
    n_x: int = 1000               # producer-location grid (quadrature oracles only)

    def __post_init__(self) -> None:
        if not self.q_min < self.q_max:
            raise ValueError(f"q_min must be below q_max, got [{self.q_min}, {self.q_max}]")
        if not self.q_min >= 0.0:
            raise ValueError(f"q_min must be nonnegative, got {self.q_min}")
        for name in ("n_q", "n_k_open", "n_k_closed", "n_p", "n_x"):
            value = getattr(self, name)
            if not (isinstance(value, (int, np.integer)) and value >= 2):
                raise ValueError(f"{name} must be an integer >= 2, got {value}")
        if not self.k_max_open > 0.0:
            raise ValueError(f"k_max_open must be positive, got {self.k_max_open}")
        if not self.k_adapt_factor > 0.0:
            raise ValueError(f"k_adapt_factor must be positive, got {self.k_adapt_factor}")

    @property
    def q_grid(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def k_grid_open(self) -> np.ndarray:
        return np.linspace(0.0, self.k_max_open, self.n_k_open)

    @property
    def x_grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_x)
