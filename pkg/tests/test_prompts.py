from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifecycle_agents.agents.prompts import PromptScenario, ScenarioKind, render_prompt, utility_formula
from lifecycle_agents.errors import ConfigError
from lifecycle_agents.lifecycle import BudgetEnvironment, Preferences

FIXTURES = Path(__file__).parent / "fixtures" / "prompts"


def fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def test_with_utility_prompt_is_byte_exact(prefs, env):
    text = render_prompt(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs))
    assert text == fixture("with_utility_aggregate.txt")


def test_gut_feeling_prompt_is_byte_exact(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.GUT_FEELING, env))
    assert text == fixture("gut_feeling_aggregate.txt")


def test_tax_prompt_is_byte_exact(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.TAX_POLICY, env.with_tax(0.3)))
    assert text == fixture("tax_policy_aggregate_tau30.txt")


def test_displayed_constants(prefs, env):
    text = render_prompt(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs))
    assert "48.6%" in text
    assert "0.818*c2" in text
    assert "141,598.4 units" in text


def test_gut_feeling_has_no_utility_function(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.GUT_FEELING, env))
    assert "preferences over consumption" not in text
    assert "based on your gut feeling" in text


def test_untaxed_sweep_point_says_zero(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.TAX_POLICY, env.with_tax(0.0)))
    assert "Tax rate on interest earnings: 0%," in text
    full = render_prompt(PromptScenario.build(ScenarioKind.TAX_POLICY, env.with_tax(1.0)))
    assert "Tax rate on interest earnings: 100%," in full


def test_tax_prompt_keeps_headline_rate(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.TAX_POLICY, env.with_tax(0.5)))
    assert "Interest rate between periods: 48.6%." in text


def test_utility_formula_log_case():
    assert utility_formula(0.818, 1.0) == "U = ln(c1) + 0.818*ln(c2)"
    assert utility_formula(0.8179, 2.0) == "U = [c1^(1-2) + 0.818*c2^(1-2)]/(1-2)"


def test_scenario_validation():
    with pytest.raises(ConfigError):
        PromptScenario(ScenarioKind.GUT_FEELING, 1.0, 2.0, 3.0, 4.0, tax_rate_percent=10.0)
    with pytest.raises(ConfigError):
        PromptScenario(ScenarioKind.TAX_POLICY, 1.0, 2.0, 3.0, 4.0)
    with pytest.raises(ConfigError):
        PromptScenario(ScenarioKind.WITH_UTILITY, 1.0, 2.0, 3.0, 4.0)
    with pytest.raises(ConfigError):
        PromptScenario.build(ScenarioKind.GUT_FEELING, BudgetEnvironment(0.0, (1.0, 1.0, 1.0), 0.1))


def test_scenario_round_trip(prefs, env):
    s = PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs)
    assert PromptScenario.from_dict(s.to_dict()) == s


amounts = st.floats(0, 1e7, allow_nan=False)


@given(amounts, amounts, amounts, amounts, amounts, amounts)
def test_rendering_is_injective_at_display_precision(a1, a2, a3, b1, b2, b3):
    # equal text exactly when the displayed parameters are equal
    s = PromptScenario(ScenarioKind.GUT_FEELING, a1, a2, a3, 48.6)
    t = PromptScenario(ScenarioKind.GUT_FEELING, b1, b2, b3, 48.6)
    assert (render_prompt(s) == render_prompt(t)) == (s == t)


def test_prompt_is_deterministic(prefs, env):
    s = PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs)
    assert render_prompt(s) == render_prompt(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs))


def test_sigma_shown_in_prompt(env):
    text = render_prompt(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, Preferences(0.5, 0.9)))
    assert "U = [c1^(1-0.5) + 0.900*c2^(1-0.5)]/(1-0.5)" in text
