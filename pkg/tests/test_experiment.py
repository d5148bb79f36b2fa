import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifecycle_agents.agents.profiles import DEFAULT_SHARES, EducationGroup
from lifecycle_agents.agents.prompts import ScenarioKind
from lifecycle_agents.config import DEFAULT_TAX_GRID, load_config, parse_config
from lifecycle_agents.errors import ConfigError
from lifecycle_agents.experiment import (
    ExperimentPlan,
    GroupRates,
    aggregate_population,
    plan_from_config,
    reference_path,
    run_scenario,
    sweep_from_records,
)
from lifecycle_agents.lifecycle import BudgetEnvironment, Preferences, saving_rates, solve_two_period

GROUPS = list(DEFAULT_SHARES)


def strip_time(records):
    out = []
    for r in records:
        d = r.to_dict()
        d.pop("timestamp")
        out.append(d)
    return out


@pytest.fixture(scope="module")
def config():
    return load_config()


@pytest.fixture(scope="module")
def sweep_records(config):
    return run_scenario(plan_from_config(config, ScenarioKind.TAX_POLICY))


def test_scenario_a_cardinality(config):
    records = run_scenario(plan_from_config(config, ScenarioKind.WITH_UTILITY))
    assert len(records) == 80
    assert all(r.ok for r in records)
    assert sorted({r.trial_index for r in records}) == list(range(1, 17))


def test_sweep_cardinality(sweep_records):
    assert len(sweep_records) == 880
    keys = {(r.agent.agent_id, r.tax_rate, r.trial_index) for r in sweep_records}
    assert len(keys) == 880


def test_same_seed_same_records(config):
    a = run_scenario(plan_from_config(config, ScenarioKind.GUT_FEELING, seed=7))
    b = run_scenario(plan_from_config(config, ScenarioKind.GUT_FEELING, seed=7))
    c = run_scenario(plan_from_config(config, ScenarioKind.GUT_FEELING, seed=8))
    assert strip_time(a) == strip_time(b)
    assert strip_time(a) != strip_time(c)


def test_records_are_sorted(sweep_records):
    keys = [r.sort_key for r in sweep_records]
    assert keys == sorted(keys)


def test_records_carry_group_calibration(sweep_records):
    r = sweep_records[0]
    assert r.environment.tax is not None
    assert r.optimum == solve_two_period(r.preferences, r.environment)


def test_plan_validation(config, calibration):
    plan = plan_from_config(config, ScenarioKind.WITH_UTILITY)
    with pytest.raises(ConfigError):
        ExperimentPlan(ScenarioKind.WITH_UTILITY, plan.agents, {}, 16)
    with pytest.raises(ConfigError):
        ExperimentPlan(ScenarioKind.TAX_POLICY, plan.agents, plan.calibrations, 16, (0.5, 0.2))
    with pytest.raises(ConfigError):
        ExperimentPlan(ScenarioKind.TAX_POLICY, plan.agents, plan.calibrations, 0)
    assert plan.expected_records == 80


def test_reference_paths(prefs, env):
    low = reference_path(Preferences(0.5, prefs.beta), env)
    rates = [p.rate_wealth_inclusive for p in low]
    assert all(b < a for a, b in zip(rates, rates[1:]))
    flat = reference_path(prefs, env)
    untaxed = solve_two_period(prefs, env)
    assert flat[0].c1 == untaxed.c1
    assert flat[0].rate_wealth_inclusive == saving_rates(env, untaxed)[0]
    no_interest = BudgetEnvironment(env.initial_wealth, env.incomes, 0.0)
    for sigma, path in ((0.5, low), (2.0, flat)):
        assert path[-1].c1 == pytest.approx(solve_two_period(Preferences(sigma, prefs.beta), no_interest).c1,
                                            rel=1e-14)


def _rates(values, tau=0.0):
    return {(g, tau): GroupRates(g, g.value, tau, (v,), (v,)) for g, v in zip(GROUPS, values)}


def test_aggregate_identical_rates():
    result = aggregate_population(_rates([0.3] * 5), DEFAULT_SHARES)
    assert result.aggregate[0].wealth_inclusive == pytest.approx(0.3, rel=1e-15)


def test_aggregate_weight_readout():
    result = aggregate_population(_rates([1, 0, 0, 0, 0]), DEFAULT_SHARES)
    assert result.aggregate[0].wealth_inclusive == 0.11


def test_aggregate_missing_group():
    rates = _rates([0.3] * 5)
    rates.update(_rates([0.3] * 4, tau=0.5))
    with pytest.raises(ConfigError):
        aggregate_population(rates, DEFAULT_SHARES)


def test_aggregate_shares_must_sum_to_one():
    with pytest.raises(ConfigError):
        aggregate_population(_rates([0.3] * 5), {g: 0.1 for g in GROUPS})


@settings(max_examples=100)
@given(st.lists(st.floats(-1, 1), min_size=5, max_size=5))
def test_aggregate_is_convex_combination(values):
    agg = aggregate_population(_rates(values), DEFAULT_SHARES).aggregate[0].wealth_inclusive
    assert min(values) - 1e-12 <= agg <= max(values) + 1e-12


def test_sweep_result(sweep_records):
    sweep = sweep_from_records(sweep_records)
    assert sweep.tax_grid == DEFAULT_TAX_GRID
    assert len(sweep.aggregate) == 11
    for tau, point in zip(sweep.tax_grid, sweep.aggregate):
        centers = [sweep.groups[(g, tau)].center() for g in GROUPS]
        assert min(centers) <= point.wealth_inclusive <= max(centers)
        assert point.band_wealth_inclusive.minimum <= point.band_wealth_inclusive.maximum
    assert set(sweep.references) == {2.0, 0.5}
    d = sweep.to_dict()
    assert len(d["groups"]) == 55


def test_median_statistic(sweep_records):
    sweep = sweep_from_records(sweep_records, statistic="median")
    g = GROUPS[0]
    assert sweep.group_curve(g)[0] == sweep.groups[(g, 0.0)].summary().median


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_config({})
    with pytest.raises(ConfigError):
        parse_config({"groups": [{"label": "primary", "share": 1.0, "model": "nope", "calibrated": {}}]})
    with pytest.raises(ConfigError):
        parse_config({"groups": [{"label": "primary", "share": 1.0, "model": "gpt-4o"}]})
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


def test_config_hash_is_stable(config):
    assert config.config_hash == load_config().config_hash
    assert len(config.config_hash) == 64
    assert config.shares() == DEFAULT_SHARES
    assert all(c.placeholder for c in config.calibrations().values())


def test_income_table_group(tmp_path):
    raw = {"groups": [{"label": "primary", "share": 1.0, "model": "llama-3.1-405b",
                       "income_table": {"group_means": [100, 90, 50, 30, 15, 10], "overall_mean": 50}}]}
    cfg = parse_config(raw)
    cal = cfg.calibrations()[EducationGroup.PRIMARY]
    assert cal.w0 > 0 and not cal.placeholder
