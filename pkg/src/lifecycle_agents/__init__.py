"""Lifecycle consumption problems answered by LLM agents and offline personas."""

from .lifecycle import (
    BudgetEnvironment,
    ConsumptionPlan,
    Preferences,
    Provenance,
    TaxPolicy,
    budget_residual,
    effective_rate,
    euler_residual,
    saving_rates,
    solve_n_period,
    solve_numeric,
    solve_two_period,
    utility,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetEnvironment",
    "ConsumptionPlan",
    "Preferences",
    "Provenance",
    "TaxPolicy",
    "budget_residual",
    "effective_rate",
    "euler_residual",
    "saving_rates",
    "solve_n_period",
    "solve_numeric",
    "solve_two_period",
    "utility",
]
