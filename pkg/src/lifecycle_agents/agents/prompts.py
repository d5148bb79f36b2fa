"""Prompt scenarios and byte-exact template rendering."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from ..errors import ConfigError
from ..lifecycle import BudgetEnvironment, Preferences


class ScenarioKind(str, Enum):
    WITH_UTILITY = "with_utility"
    GUT_FEELING = "gut_feeling"
    TAX_POLICY = "tax_policy"


def fmt_currency(x: float) -> str:
    return f"{x:,.1f}"


def fmt_rate(pct: float) -> str:
    return f"{pct:.1f}"


def fmt_tax(pct: float) -> str:
    return f"{pct:.1f}".rstrip("0").rstrip(".")


def fmt_beta(beta: float) -> str:
    return f"{beta:.3f}"


def fmt_sigma(sigma: float) -> str:
    return f"{sigma:g}"


def _normalized(fmt, x: float) -> float:
    return float(fmt(x).replace(",", ""))


@dataclass(frozen=True)
class PromptScenario:
    """Parameters shown to an agent.

    Values are stored at display precision so that two scenarios render to the
    same text only when they are equal.
    """

    kind: ScenarioKind
    current_savings: float
    working_income: float
    retirement_income: float
    interest_rate_percent: float
    tax_rate_percent: float | None = None
    beta_display: float | None = None
    sigma_display: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        for name in ("current_savings", "working_income", "retirement_income", "interest_rate_percent"):
            if getattr(self, name) is None:
                raise ConfigError(f"scenario parameter {name!r} is missing")
        if (self.tax_rate_percent is not None) != (self.kind is ScenarioKind.TAX_POLICY):
            raise ConfigError("tax_rate_percent must be given exactly for tax_policy scenarios")
        if self.kind is ScenarioKind.WITH_UTILITY and (self.beta_display is None or self.sigma_display is None):
            raise ConfigError("with_utility scenarios need beta_display and sigma_display")
        for name, fmt in (
            ("current_savings", fmt_currency),
            ("working_income", fmt_currency),
            ("retirement_income", fmt_currency),
            ("interest_rate_percent", fmt_rate),
            ("tax_rate_percent", fmt_tax),
            ("beta_display", fmt_beta),
            ("sigma_display", fmt_sigma),
        ):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _normalized(fmt, float(value)))

    @classmethod
    def build(cls, kind: ScenarioKind | str, env: BudgetEnvironment,
              prefs: Preferences | None = None) -> "PromptScenario":
        kind = ScenarioKind(kind)
        if env.n_periods != 2:
            raise ConfigError("prompts describe two-period problems")
        tax = None
        if kind is ScenarioKind.TAX_POLICY:
            tax = 100 * (env.tax.interest_tax_rate if env.tax else 0.0)
        with_u = kind is ScenarioKind.WITH_UTILITY
        if with_u and prefs is None:
            raise ConfigError("with_utility scenarios need preferences")
        return cls(
            kind=kind,
            current_savings=env.initial_wealth,
            working_income=env.incomes[0],
            retirement_income=env.incomes[1],
            interest_rate_percent=100 * env.period_rate,
            tax_rate_percent=tax,
            beta_display=prefs.beta if with_u else None,
            sigma_display=prefs.sigma if with_u else None,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PromptScenario":
        return cls(**d)


@lru_cache(maxsize=None)
def load_template(kind: ScenarioKind) -> str:
    path = resources.files("lifecycle_agents.agents") / "templates" / f"{ScenarioKind(kind).value}.txt"
    return path.read_text(encoding="utf-8").rstrip("\n")


def utility_formula(beta: float, sigma: float) -> str:
    b = fmt_beta(beta)
    if sigma == 1:
        return f"U = ln(c1) + {b}*ln(c2)"
    s = fmt_sigma(sigma)
    return f"U = [c1^(1-{s}) + {b}*c2^(1-{s})]/(1-{s})"


def render_prompt(scenario: PromptScenario) -> str:
    fields = {
        "current_savings": fmt_currency(scenario.current_savings),
        "working_income": fmt_currency(scenario.working_income),
        "retirement_income": fmt_currency(scenario.retirement_income),
        "interest_rate": fmt_rate(scenario.interest_rate_percent),
    }
    if scenario.kind is ScenarioKind.WITH_UTILITY:
        fields["utility_formula"] = utility_formula(scenario.beta_display, scenario.sigma_display)
    if scenario.kind is ScenarioKind.TAX_POLICY:
        fields["tax_rate"] = fmt_tax(scenario.tax_rate_percent)
    return load_template(scenario.kind).format(**fields)
