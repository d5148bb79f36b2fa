"""Age-group income data to two-period parameters.

Incomes are projected decade by decade with a constant growth rate, the four
decades from age 40 are collapsed into a working and a retirement period, and
initial wealth comes from a six-period problem solved from age 20 with zero
assets.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

from .errors import DomainError
from .lifecycle import (
    BudgetEnvironment,
    Preferences,
    solve_n_period,
    wealth_path,
)

N_AGE_GROUPS = 6
AGE_GROUPS = ("20-29", "30-39", "40-49", "50-59", "60-69", "70-79")


@dataclass(frozen=True)
class AgeGroupIncomeTable:
    group_means: tuple[float, ...]
    overall_mean: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "group_means", tuple(float(v) for v in self.group_means))
        if len(self.group_means) != N_AGE_GROUPS:
            raise DomainError(f"expected {N_AGE_GROUPS} age groups, got {len(self.group_means)}")
        if any(not v > 0 for v in self.group_means):
            raise DomainError("age-group means must be positive")
        if not self.overall_mean > 0:
            raise DomainError("overall mean income must be positive")


@dataclass(frozen=True)
class GrowthAssumptions:
    annual_growth: float = 0.04
    annual_rate: float = 0.02
    annual_discount: float = 0.99
    sigma: float = 2.0
    years_per_decade: int = 10

    def __post_init__(self) -> None:
        if not self.annual_growth > -1 or not self.annual_rate > -1:
            raise DomainError("growth and interest rates must exceed -1")
        if not 0 < self.annual_discount < 1:
            raise DomainError("annual discount must lie in (0, 1)")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")

    @property
    def decade_rate(self) -> float:
        return (1 + self.annual_rate) ** self.years_per_decade - 1

    @property
    def decade_discount(self) -> float:
        return self.annual_discount ** self.years_per_decade

    @property
    def period_rate(self) -> float:
        """Rate between the two 20-year periods."""
        return period_rate_consistency_check(self.annual_rate, 2 * self.years_per_decade)

    @property
    def period_discount(self) -> float:
        return self.annual_discount ** (2 * self.years_per_decade)


@dataclass(frozen=True)
class CalibratedParameters:
    w0: float
    y1: float
    y2: float
    beta_period: float
    sigma: float
    rate_period: float
    group_label: str = "aggregate"
    placeholder: bool = False
    flags: tuple[str, ...] = field(default=())

    def preferences(self) -> Preferences:
        return Preferences(self.sigma, self.beta_period)

    def environment(self, tax_rate: float | None = None,
                    rebate_on_borrowing: bool = True) -> BudgetEnvironment:
        env = BudgetEnvironment(self.w0, (self.y1, self.y2), self.rate_period)
        return env.with_tax(tax_rate, rebate_on_borrowing)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CalibratedParameters":
        d = dict(d)
        d["flags"] = tuple(d.get("flags", ()))
        return cls(**d)


def income_ratios(table: AgeGroupIncomeTable) -> list[float]:
    return [m / table.overall_mean for m in table.group_means]


def projected_income(mean_income: float, growth: float, decade: int, ratio: float,
                     years_per_decade: int = 10) -> float:
    """Income ``decade`` decades ahead for an age group with income ratio ``ratio``."""
    if not 0 <= decade <= 5:
        raise DomainError(f"decade index must be in 0..5, got {decade}")
    return mean_income * (1 + growth) ** (years_per_decade * decade) * ratio


def decade_incomes(table: AgeGroupIncomeTable, assumptions: GrowthAssumptions) -> list[float]:
    """Projected income path of an agent who is 20-29 today, one value per decade."""
    return [
        projected_income(table.overall_mean, assumptions.annual_growth, i, k,
                         assumptions.years_per_decade)
        for i, k in enumerate(income_ratios(table))
    ]


def collapse_to_two_periods(incomes_40_to_79: Sequence[float], annual_rate: float,
                            years_per_decade: int = 10) -> tuple[float, float]:
    """Merge the four decades from age 40 into ``(y1, y2)``.

    The second decade of each 20-year period is discounted to the start of
    that period.
    """
    if len(incomes_40_to_79) != 4:
        raise DomainError("need the four decade incomes for ages 40-49 .. 70-79")
    d = (1 + annual_rate) ** years_per_decade
    a, b, c, e = incomes_40_to_79
    return a + b / d, c + e / d


def initial_wealth(incomes: Sequence[float], assumptions: GrowthAssumptions) -> float:
    """Optimal assets at the start of age 40 in a six-decade problem started at 20 with no wealth.

    May be negative when early incomes are low (borrowing against later
    income); callers flag it rather than clamping.
    """
    if len(incomes) != N_AGE_GROUPS:
        raise DomainError(f"need {N_AGE_GROUPS} decade incomes")
    prefs = Preferences(assumptions.sigma, assumptions.decade_discount)
    env = BudgetEnvironment(0.0, tuple(incomes), assumptions.decade_rate)
    plan = solve_n_period(prefs, env)
    return wealth_path(env, plan)[2]


def period_rate_consistency_check(annual_rate: float, horizon_years: int = 20) -> float:
    return (1 + annual_rate) ** horizon_years - 1


def calibrate(table: AgeGroupIncomeTable, assumptions: GrowthAssumptions | None = None,
              group_label: str = "aggregate") -> CalibratedParameters:
    a = assumptions or GrowthAssumptions()
    path = decade_incomes(table, a)
    y1, y2 = collapse_to_two_periods(path[2:], a.annual_rate, a.years_per_decade)
    w0 = initial_wealth(path, a)
    flags = ("negative_initial_wealth",) if w0 < 0 else ()
    return CalibratedParameters(
        w0=w0, y1=y1, y2=y2,
        beta_period=a.period_discount,
        sigma=a.sigma,
        rate_period=a.period_rate,
        group_label=group_label,
        flags=flags,
    )


def published_calibration(group_label: str = "aggregate", placeholder: bool = False) -> CalibratedParameters:
    """Published urban-China aggregate values (incomes in model units)."""
    a = GrowthAssumptions()
    return CalibratedParameters(
        w0=141_598.4, y1=958_189.8, y2=244_103.9,
        beta_period=a.period_discount,
        sigma=a.sigma,
        rate_period=a.period_rate,
        group_label=group_label,
        placeholder=placeholder,
    )

