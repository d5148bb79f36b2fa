import numpy as np
import pytest

from lifecycle_agents.agents.gateway import TrialContext, run_trial
from lifecycle_agents.agents.parsing import parse_final_answer
from lifecycle_agents.agents.personas import (
    _expected_metrics,
    calibrate_persona,
    default_persona,
    perturbed_plan,
    persona_generate,
)
from lifecycle_agents.agents.profiles import (
    DEFAULT_SHARES,
    MODEL_SPECS,
    AgentProfile,
    Backend,
    EducationGroup,
    PersonaParams,
    check_shares,
    default_agents,
)
from lifecycle_agents.agents.prompts import PromptScenario, ScenarioKind
from lifecycle_agents.errors import ConfigError
from lifecycle_agents.lifecycle import solve_two_period
from lifecycle_agents.metrics import Motive, mapd, tag_motives


def _agent(persona, model="deepseek-v3"):
    spec = MODEL_SPECS[model]
    return AgentProfile(model, Backend.PERSONA, model, spec.temperature, spec.education_group,
                        spec.population_share, spec.temperature_range, spec.provider, persona)


def _responses(agent, prefs, env, n, base_seed=0, kind=ScenarioKind.WITH_UTILITY):
    scenario = PromptScenario.build(kind, env, prefs)
    optimum = solve_two_period(prefs, env)
    return [persona_generate(agent, scenario, optimum, env, trial_index=k, base_seed=base_seed)
            for k in range(1, n + 1)]


def test_zero_noise_persona_answers_the_optimum(prefs, env):
    agent = _agent(PersonaParams())
    optimum = solve_two_period(prefs, env)
    for text in _responses(agent, prefs, env, 5):
        plan = parse_final_answer(text).plan
        assert plan.consumptions == optimum.consumptions


def test_persona_is_deterministic(prefs, env):
    agent = _agent(PersonaParams(noise_sd=0.05, underconsumption_bias=0.02))
    assert _responses(agent, prefs, env, 8) == _responses(agent, prefs, env, 8)


def test_trials_do_not_depend_on_order(prefs, env):
    agent = _agent(PersonaParams(noise_sd=0.05))
    scenario = PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs)
    optimum = solve_two_period(prefs, env)
    forward = [persona_generate(agent, scenario, optimum, env, trial_index=k) for k in range(1, 6)]
    backward = [persona_generate(agent, scenario, optimum, env, trial_index=k) for k in range(5, 0, -1)]
    assert forward == backward[::-1]


def test_seed_changes_answers(prefs, env):
    agent = _agent(PersonaParams(noise_sd=0.05))
    assert _responses(agent, prefs, env, 4, base_seed=0) != _responses(agent, prefs, env, 4, base_seed=1)


def test_every_response_parses_and_mentions_balance(prefs, env):
    for model in MODEL_SPECS:
        agent = _agent(default_persona(model, prefs, env), model)
        for text in _responses(agent, prefs, env, 16, kind=ScenarioKind.GUT_FEELING):
            assert parse_final_answer(text).ok
            labels = [t.label for t in tag_motives(text)]
            assert Motive.CONSUMPTION_SMOOTHING in labels


def test_motive_overrides(prefs, env):
    params = PersonaParams(motive_frequencies={"consumption smoothing": 1.0})
    text = _responses(_agent(params), prefs, env, 1)[0]
    assert [t.label for t in tag_motives(text)] == [Motive.CONSUMPTION_SMOOTHING]


def test_perturbed_plan_formula(env, prefs):
    optimum = solve_two_period(prefs, env)
    params = PersonaParams(bias_c1=0.1, noise_sd=0.0, underconsumption_bias=0.05)
    c1, c2 = perturbed_plan(params, optimum, env, 0.0, 0.5)
    assert c1 == pytest.approx(optimum.c1 * 1.05)
    W = env.lifetime_wealth
    assert c2 == pytest.approx((W - c1) * (1 + env.rate) * (1 - 0.05))


def test_calibration_hits_targets(prefs, env):
    params = calibrate_persona(0.0194, prefs, env, target_budget_mapd=0.0095)
    rng = np.random.default_rng(20_241_120)
    eps, u = rng.standard_normal(20_000), rng.random(20_000)
    m, b = _expected_metrics(params, solve_two_period(prefs, env), env, eps, u)
    assert m == pytest.approx(0.0194, abs=1e-6)
    assert b == pytest.approx(0.0095, abs=1e-6)


def test_unreachable_target_leaves_no_noise(prefs, env):
    # the slack needed for a 30.66% budget gap already exceeds a 31.35% MAPD
    params = default_persona("llama-3.1-405b", prefs, env)
    assert params.noise_sd == 0.0
    assert params.underconsumption_bias > 0.3


def test_sample_mapd_matches_calibration(prefs, env):
    params = default_persona("deepseek-v3", prefs, env)
    agent = _agent(params)
    optimum = solve_two_period(prefs, env)
    plans = [parse_final_answer(t).plan for t in _responses(agent, prefs, env, 2000)]
    assert mapd(plans, optimum) == pytest.approx(0.0194, abs=0.005)


def test_default_shares():
    assert DEFAULT_SHARES[EducationGroup.JUNIOR_HIGH] == 0.35
    assert sum(DEFAULT_SHARES.values()) == pytest.approx(1.0, abs=1e-12)
    check_shares(default_agents())


def test_agent_validation():
    spec = MODEL_SPECS["gpt-4o"]
    with pytest.raises(ConfigError):
        AgentProfile("gpt-4o", Backend.LIVE_PROVIDER, spec.api_model, 1.5, spec.education_group, 0.12,
                     spec.temperature_range, spec.provider)
    with pytest.raises(ConfigError):
        AgentProfile("x", Backend.LIVE_PROVIDER, "x", 0.5, EducationGroup.PRIMARY, 0.1)
    with pytest.raises(ConfigError):
        PersonaParams(noise_sd=-0.1)


def test_agent_round_trip():
    for agent in default_agents():
        assert AgentProfile.from_dict(agent.to_dict()) == agent


def test_run_trial_record(prefs, env):
    agent = _agent(PersonaParams(noise_sd=0.02))
    scenario = PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs)
    ctx = TrialContext(scenario, env, solve_two_period(prefs, env), 3, 0)
    record = run_trial(agent, ctx, prefs)
    assert record.ok and record.error is None
    assert len(record.prompt_sha256) == 64
    assert record.request_metadata["provider"] == "persona"
