"""CRRA lifecycle consumption problems: closed forms, residuals and a grid oracle.

Everything here is a pure function of its arguments. Periods are indexed from
1; wealth evolves as ``a[t+1] = (a[t] + y[t] - c[t]) * (1 + r)`` with
``a[1] = w0``, which reproduces the two-period intertemporal budget exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DomainError, InfeasibleEnvironmentError


class Provenance(str, Enum):
    ANALYTICAL = "analytical"
    AGENT_PARSED = "agent_parsed"
    REFERENCE_PATH = "reference_path"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class Preferences:
    """CRRA curvature ``sigma`` and per-period discount factor ``beta``."""

    sigma: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not 0 < self.beta < 1:
            raise DomainError(f"beta must lie strictly in (0, 1), got {self.beta}")


@dataclass(frozen=True)
class TaxPolicy:
    """Proportional tax on interest income, collected in the following period.

    With ``rebate_on_borrowing`` false, negative savings pay the gross rate
    instead of receiving the after-tax rate.
    """

    interest_tax_rate: float
    rebate_on_borrowing: bool = True

    def __post_init__(self) -> None:
        if not 0 <= self.interest_tax_rate <= 1:
            raise DomainError(f"tax rate must lie in [0, 1], got {self.interest_tax_rate}")


@dataclass(frozen=True)
class BudgetEnvironment:
    initial_wealth: float
    incomes: tuple[float, ...]
    period_rate: float
    tax: TaxPolicy | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "incomes", tuple(float(y) for y in self.incomes))
        if not self.incomes:
            raise DomainError("incomes must be non-empty")
        if self.initial_wealth < 0 or any(y < 0 for y in self.incomes):
            raise DomainError("initial wealth and incomes must be non-negative")
        if not self.period_rate > -1:
            raise DomainError(f"period rate must exceed -1, got {self.period_rate}")

    @property
    def n_periods(self) -> int:
        return len(self.incomes)

    @property
    def rate(self) -> float:
        """After-tax return on savings."""
        return effective_rate(self.period_rate, self.tax)

    @property
    def lifetime_wealth(self) -> float:
        return lifetime_wealth(self)

    def with_tax(self, tax_rate: float | None, rebate_on_borrowing: bool = True) -> "BudgetEnvironment":
        tax = None if tax_rate is None else TaxPolicy(tax_rate, rebate_on_borrowing)
        return BudgetEnvironment(self.initial_wealth, self.incomes, self.period_rate, tax)

    def scaled(self, factor: float) -> "BudgetEnvironment":
        return BudgetEnvironment(
            self.initial_wealth * factor,
            tuple(y * factor for y in self.incomes),
            self.period_rate,
            self.tax,
        )


@dataclass(frozen=True)
class ConsumptionPlan:
    consumptions: tuple[float, ...]
    provenance: Provenance = Provenance.ANALYTICAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "consumptions", tuple(float(c) for c in self.consumptions))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if any(not c >= 0 for c in self.consumptions):
            raise DomainError(f"consumptions must be non-negative, got {self.consumptions}")

    @property
    def c1(self) -> float:
        return self.consumptions[0]

    @property
    def c2(self) -> float:
        return self.consumptions[1]

    def __len__(self) -> int:
        return len(self.consumptions)


def utility(c: float, sigma: float) -> float:
    if not c > 0:
        raise DomainError(f"utility undefined for c={c}")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    if sigma == 1:
        return math.log(c)
    return c ** (1 - sigma) / (1 - sigma)


def marginal_utility(c: float, sigma: float) -> float:
    if not c > 0:
        raise DomainError(f"marginal utility undefined for c={c}")
    return c ** (-sigma)


def effective_rate(r: float, tax: TaxPolicy | None) -> float:
    if not r > -1:
        raise DomainError(f"rate must exceed -1, got {r}")
    if tax is None:
        return r
    return r * (1 - tax.interest_tax_rate)


def _borrowing_rate(env: BudgetEnvironment) -> float:
    if env.tax is not None and not env.tax.rebate_on_borrowing:
        return env.period_rate
    return env.rate


def _rate_for_savings(env: BudgetEnvironment, savings: float) -> float:
    return env.rate if savings >= 0 else _borrowing_rate(env)


def lifetime_wealth(env: BudgetEnvironment, rate: float | None = None) -> float:
    """Present value of ``w0`` plus all incomes at the after-tax rate."""
    r = env.rate if rate is None else rate
    return env.initial_wealth + sum(y / (1 + r) ** t for t, y in enumerate(env.incomes))


def _check_feasible(env: BudgetEnvironment) -> float:
    W = lifetime_wealth(env)
    if not W > 0:
        raise InfeasibleEnvironmentError(f"lifetime wealth must be positive, got {W}")
    return W


def _closed_form(prefs: Preferences, W: float, r: float) -> tuple[float, float]:
    growth = (prefs.beta * (1 + r)) ** (1 / prefs.sigma)
    denom = 1 + growth / (1 + r)
    return W / denom, W * growth / denom


def solve_two_period(prefs: Preferences, env: BudgetEnvironment) -> ConsumptionPlan:
    """Optimal ``(c1, c2)`` from the Euler equation and the intertemporal budget."""
    if env.n_periods != 2:
        raise DomainError(f"two-period solver needs 2 incomes, got {env.n_periods}")
    W = _check_feasible(env)
    w0, (y1, y2) = env.initial_wealth, env.incomes
    c1, c2 = _closed_form(prefs, W, env.rate)
    if w0 + y1 - c1 < 0 and _borrowing_rate(env) != env.rate:
        # savings region rejected; try the borrowing branch, else sit at the kink
        rb = _borrowing_rate(env)
        Wb = w0 + y1 + y2 / (1 + rb)
        c1, c2 = _closed_form(prefs, Wb, rb)
        if w0 + y1 - c1 >= 0:
            c1, c2 = w0 + y1, y2
    return ConsumptionPlan((c1, c2), Provenance.ANALYTICAL)


def solve_n_period(prefs: Preferences, env: BudgetEnvironment) -> ConsumptionPlan:
    """Optimal plan for ``N >= 2`` periods under a constant after-tax rate."""
    if env.n_periods < 2:
        raise DomainError("need at least two periods")
    if _borrowing_rate(env) != env.rate:
        if env.n_periods == 2:
            return solve_two_period(prefs, env)
        raise NotImplementedError("asymmetric borrowing rates are only supported for two periods")
    W = _check_feasible(env)
    r = env.rate
    growth = (prefs.beta * (1 + r)) ** (1 / prefs.sigma)
    ratio = growth / (1 + r)
    c1 = W / sum(ratio ** t for t in range(env.n_periods))
    return ConsumptionPlan(tuple(c1 * growth ** t for t in range(env.n_periods)), Provenance.ANALYTICAL)


def wealth_path(env: BudgetEnvironment, plan: ConsumptionPlan) -> list[float]:
    """Start-of-period wealth ``[a1, ..., a_{N+1}]``; ``a_{N+1}`` is terminal."""
    _check_length(env, plan)
    a = [env.initial_wealth]
    for y, c in zip(env.incomes, plan.consumptions):
        s = a[-1] + y - c
        a.append(s * (1 + _rate_for_savings(env, s)))
    return a


def _check_length(env: BudgetEnvironment, plan: ConsumptionPlan) -> None:
    if len(plan) != env.n_periods:
        raise DomainError(f"plan has {len(plan)} periods, environment has {env.n_periods}")


def _pair_rates(env: BudgetEnvironment, plan: ConsumptionPlan) -> list[float]:
    if env.n_periods == 2:
        s = env.initial_wealth + env.incomes[0] - plan.c1
        return [_rate_for_savings(env, s)]
    return [env.rate] * (env.n_periods - 1)


def euler_residual(prefs: Preferences, env: BudgetEnvironment, plan: ConsumptionPlan,
                   relative: bool = False) -> float:
    """``u'(c_t) - beta (1 + r) u'(c_{t+1})``, the adjacent pair with largest magnitude.

    With ``relative`` the residual is divided by ``u'(c_t)``.
    """
    _check_length(env, plan)
    worst = 0.0
    for t, r in enumerate(_pair_rates(env, plan)):
        c_now, c_next = plan.consumptions[t], plan.consumptions[t + 1]
        mu_now = marginal_utility(c_now, prefs.sigma)
        mu_next = marginal_utility(c_next, prefs.sigma)
        res = mu_now - prefs.beta * (1 + r) * mu_next
        if relative:
            res /= mu_now
        if abs(res) > abs(worst):
            worst = res
    return worst


def budget_residual(env: BudgetEnvironment, plan: ConsumptionPlan) -> float:
    """Signed fraction ``(PV(consumption) - W) / W``; positive means over-consumption."""
    _check_length(env, plan)
    r = _pair_rates(env, plan)[0] if env.n_periods == 2 else env.rate
    W = lifetime_wealth(env, r)
    pv = sum(c / (1 + r) ** t for t, c in enumerate(plan.consumptions))
    return (pv - W) / W


def saving_rates(env: BudgetEnvironment, plan: ConsumptionPlan | float) -> tuple[float, float]:
    """``(1 - c1/(w0 + y1), 1 - c1/y1)``, unclamped."""
    c1 = plan if isinstance(plan, (int, float)) else plan.c1
    w0, y1 = env.initial_wealth, env.incomes[0]
    if w0 + y1 <= 0 or y1 <= 0:
        raise DomainError("saving rates need positive w0 + y1 and y1")
    return 1 - c1 / (w0 + y1), 1 - c1 / y1


def solve_numeric(prefs: Preferences, env: BudgetEnvironment,
                  grid_resolution: int = 1_000_000) -> ConsumptionPlan:
    """Brute-force two-period optimum: utility grid search, then Euler bisection.

    Independent of the closed form: it only uses the period budget
    ``c2 = y2 + s (1 + r(s))`` and the first-order condition.
    """
    if grid_resolution < 1000:
        raise DomainError("grid_resolution must be at least 1000")
    if env.n_periods != 2:
        raise DomainError("numeric oracle covers the two-period problem only")
    _check_feasible(env)
    w0, (y1, y2) = env.initial_wealth, env.incomes
    cash = w0 + y1
    r_save, r_borrow = env.rate, _borrowing_rate(env)
    c1_max = cash + y2 / (1 + r_borrow)

    def c2_of(c1):
        s = cash - c1
        return y2 + s * (1 + np.where(s >= 0, r_save, r_borrow))

    grid = c1_max * np.arange(1, grid_resolution + 1) / (grid_resolution + 1)
    c2 = c2_of(grid)
    ok = c2 > 0
    if prefs.sigma == 1:
        u = np.log(grid) + prefs.beta * np.log(np.where(ok, c2, 1.0))
    else:
        e = 1 - prefs.sigma
        u = (grid ** e + prefs.beta * np.where(ok, c2, 1.0) ** e) / e
    u = np.where(ok, u, -np.inf)
    k = int(np.argmax(u))
    best = float(grid[k])

    def foc(c1: float) -> float:
        # positive while raising c1 still increases utility
        s = cash - c1
        r = r_save if s >= 0 else r_borrow
        c2v = y2 + s * (1 + r)
        return prefs.sigma * (math.log(c2v) - math.log(c1)) - math.log(prefs.beta * (1 + r))

    brackets = [
        (float(grid[max(k - 1, 0)]), float(grid[min(k + 1, grid_resolution - 1)])),
        (c1_max * 1e-12, c1_max * (1 - 1e-12)),
    ]
    for lo, hi in brackets:
        try:
            f_lo, f_hi = foc(lo), foc(hi)
        except (ValueError, ZeroDivisionError):
            continue
        if f_lo > 0 > f_hi:
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                if foc(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            best = 0.5 * (lo + hi)
            break
    return ConsumptionPlan((best, float(c2_of(best))), Provenance.NUMERIC)


def two_period_environment(w0: float, y1: float, y2: float, rate: float,
                           tax_rate: float | None = None) -> BudgetEnvironment:
    tax = None if tax_rate is None else TaxPolicy(tax_rate)
    return BudgetEnvironment(w0, (y1, y2), rate, tax)


def plan_from(values: Sequence[float], provenance: Provenance = Provenance.AGENT_PARSED) -> ConsumptionPlan:
    return ConsumptionPlan(tuple(values), provenance)
