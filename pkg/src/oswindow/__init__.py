"""Dynamic discrete-choice model of a firm's decision to open source a
general-purpose AI model, solved by value function iteration."""

from .analysis import (
    AuditReport,
    DevelopmentResult,
    SweepResult,
    WindowResult,
    audit_propositions,
    development_value,
    model_value,
    open_source_window,
    phi_value_crossing,
    sweep_firm_size,
    sweep_phi,
    sweep_qb,
)
from .economics import (
    api_demand,
    api_profit,
    external_compute_b,
    external_compute_open,
    firm_profit,
    indifference_price,
    marginal_adopter,
    optimal_compute,
    producer_profit,
    static_optimal_compute,
    theta,
)
from .params import EconParams, GridSpec
from .solver import (
    ClosedSolution,
    ConvergenceError,
    DECISION_LABELS,
    KEEP_CLOSED,
    OPEN_SOURCE,
    OpenSolution,
    PolicySaturationWarning,
    SWITCH_TO_B,
    adaptive_k_max,
    bellman_closed,
    bellman_open,
    interpolate_value,
    solve_closed,
    solve_open,
)

__all__ = [
    "AuditReport", "ClosedSolution", "ConvergenceError", "DECISION_LABELS",
    "DevelopmentResult", "EconParams", "GridSpec", "KEEP_CLOSED", "OPEN_SOURCE",
    "OpenSolution", "PolicySaturationWarning", "SWITCH_TO_B", "SweepResult",
    "WindowResult", "adaptive_k_max", "api_demand", "api_profit",
    "audit_propositions", "bellman_closed", "bellman_open", "development_value",
    "external_compute_b", "external_compute_open", "firm_profit",
    "indifference_price", "interpolate_value", "marginal_adopter", "model_value",
    "open_source_window", "optimal_compute", "phi_value_crossing",
    "producer_profit", "solve_closed", "solve_open", "static_optimal_compute",
    "sweep_firm_size", "sweep_phi", "sweep_qb", "theta",
]

__version__ = "0.1.0"
