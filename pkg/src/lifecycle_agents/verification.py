"""Self-checks behind ``lifecycle-agents verify``.

Each check compares the analytical solver or a derived quantity against an
independent computation. Informational checks are reported but never fail
the command.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .agents.profiles import DEFAULT_SHARES
from .calibration import period_rate_consistency_check, published_calibration
from .config import DEFAULT_TAX_GRID
from .errors import InfeasibleEnvironmentError
from .experiment import reference_paths
from .lifecycle import (
    BudgetEnvironment,
    Preferences,
    budget_residual,
    euler_residual,
    solve_numeric,
    solve_two_period,
)

# Saving rate at tau = 0, sigma = 2 quoted alongside the reference curves.
QUOTED_FLAT_RATE = 0.28
QUOTED_FLAT_TOLERANCE = 0.03


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    informational: bool = False

    def line(self) -> str:
        tag = "PASS" if self.passed else ("INFO" if self.informational else "FAIL")
        return f"[{tag}] {self.name}: {self.detail}"


def random_problem(rng: np.random.Generator) -> tuple[Preferences, BudgetEnvironment]:
    """One draw from the property-sweep box."""
    while True:
        prefs = Preferences(float(rng.uniform(0.25, 10.0)), float(rng.uniform(0.5, 0.999)))
        env = BudgetEnvironment(float(rng.uniform(0, 1e6)),
                                (float(rng.uniform(1e3, 2e6)), float(rng.uniform(0, 2e6))),
                                float(rng.uniform(0, 1)))
        if env.lifetime_wealth > 0:
            return prefs, env


def oracle_agreement(n_draws: int = 1000, seed: int = 0,
                     grid_resolution: int = 10_000) -> tuple[float, float]:
    """Largest relative gap between closed form and numeric oracle, and seconds taken."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(n_draws):
        prefs, env = random_problem(rng)
        a = solve_two_period(prefs, env)
        b = solve_numeric(prefs, env, grid_resolution)
        for x, y in zip(a.consumptions, b.consumptions):
            worst = max(worst, abs(x - y) / abs(x))
    return worst, time.perf_counter() - start


def run_checks(n_draws: int = 1000, seed: int = 0) -> list[Check]:
    checks = []

    worst, secs = oracle_agreement(n_draws, seed)
    checks.append(Check("oracle agreement", worst < 1e-6 and secs < 60,
                        f"{n_draws} draws, max relative gap {worst:.2e}, {secs:.1f}s"))

    r20 = period_rate_consistency_check(0.02, 20)
    b20 = 0.99 ** 20
    checks.append(Check("period constants", round(r20 * 100, 1) == 48.6 and round(b20, 3) == 0.818,
                        f"(1.02^20 - 1) = {r20 * 100:.4f}%, 0.99^20 = {b20:.6f}"))

    cal = published_calibration()
    prefs, env = cal.preferences(), cal.environment()
    plan = solve_two_period(prefs, env)
    eu = abs(euler_residual(prefs, env, plan, relative=True))
    bu = abs(budget_residual(env, plan))
    checks.append(Check("calibrated optimum residuals", eu < 1e-9 and bu < 1e-12,
                        f"c1 = {plan.c1:,.2f}, c2 = {plan.c2:,.2f}, euler {eu:.1e}, budget {bu:.1e}"))

    refs = reference_paths(cal, DEFAULT_TAX_GRID)
    low = [p.rate_wealth_inclusive for p in refs[0.5]]
    checks.append(Check("sigma = 0.5 path declines", all(b < a for a, b in zip(low, low[1:])),
                        " ".join(f"{v:.4f}" for v in low)))

    untaxed = refs[2.0][0]
    exact = solve_two_period(prefs, env)
    same = math.isclose(untaxed.c1, exact.c1, rel_tol=0, abs_tol=0)
    checks.append(Check("reference path at tau = 0 equals the untaxed optimum", same,
                        f"c1 = {untaxed.c1:,.2f}"))

    gap = untaxed.rate_wealth_inclusive - QUOTED_FLAT_RATE
    checks.append(Check(
        "sigma = 2 untaxed saving rate vs quoted 0.28",
        abs(gap) <= QUOTED_FLAT_TOLERANCE,
        f"computed {untaxed.rate_wealth_inclusive:.4f} (income-only {untaxed.rate_income_only:.4f}); "
        f"quoted {QUOTED_FLAT_RATE} +/- {QUOTED_FLAT_TOLERANCE}",
        informational=True,
    ))

    full_tax = refs[2.0][-1]
    zero_rate = solve_two_period(prefs, BudgetEnvironment(env.initial_wealth, env.incomes, 0.0))
    checks.append(Check("tau = 1 matches a zero interest rate", math.isclose(full_tax.c1, zero_rate.c1,
                                                                             rel_tol=1e-12),
                        f"c1 = {full_tax.c1:,.2f}"))

    total = math.fsum(DEFAULT_SHARES.values())
    checks.append(Check("population shares sum to one", total == 1.0, f"sum = {total:.10f}"))

    try:
        solve_two_period(prefs, BudgetEnvironment(0.0, (0.0, 0.0), 0.1))
        checks.append(Check("infeasible environment rejected", False, "no error raised"))
    except InfeasibleEnvironmentError:
        checks.append(Check("infeasible environment rejected", True, "InfeasibleEnvironmentError"))
    return checks


def verify(n_draws: int = 1000, seed: int = 0) -> tuple[bool, list[Check]]:
    checks = run_checks(n_draws, seed)
    return all(c.passed or c.informational for c in checks), checks
