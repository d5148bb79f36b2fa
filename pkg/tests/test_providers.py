import json

import httpx
import pytest

from lifecycle_agents.agents.gateway import TrialContext, run_trial
from lifecycle_agents.agents.parsing import ParseStatus
from lifecycle_agents.agents.profiles import MODEL_SPECS, AgentProfile, Backend
from lifecycle_agents.agents.prompts import PromptScenario, ScenarioKind
from lifecycle_agents.agents.providers import LiveClient, ProviderConfig, build_request, load_providers
from lifecycle_agents.errors import (
    ConfigError,
    ProviderAuthError,
    ProviderError,
    RateLimitError,
    RunAbortedError,
)
from lifecycle_agents.experiment import ExperimentPlan, run_scenario
from lifecycle_agents.lifecycle import solve_two_period

ANSWER = ("Final Answer: I will choose to consume 725,000 units during my working period and "
          "801,000 units during my retirement period because balance.")


def openai_ok(text=ANSWER):
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


def make_client(handler, providers=None, **cfg):
    base = dict(name="mock", endpoint="https://mock.test/v1/chat", api_key_env="MOCK_KEY",
                backoff_base_s=0.01, max_retries=3)
    base.update(cfg)
    providers = providers or {"mock": ProviderConfig(**base)}
    sleeps = []
    client = LiveClient(providers, http=httpx.Client(transport=httpx.MockTransport(handler)),
                        sleep=sleeps.append)
    return client, sleeps


@pytest.fixture(autouse=True)
def key(monkeypatch):
    monkeypatch.setenv("MOCK_KEY", "secret")


def test_success_and_request_shape():
    seen = []

    def handler(request):
        seen.append(request)
        return openai_ok()

    client, _ = make_client(handler)
    text, meta = client.complete("mock", "model-x", "hello", 0.7)
    assert text == ANSWER
    assert meta["attempts"] == 1 and meta["system_prompt"] is None
    body = json.loads(seen[0].content)
    assert body == {"model": "model-x", "messages": [{"role": "user", "content": "hello"}], "temperature": 0.7}
    assert seen[0].headers["authorization"] == "Bearer secret"


def test_retries_then_succeeds_honouring_retry_after():
    calls = iter([httpx.Response(429, headers={"retry-after": "2"}), httpx.Response(503), openai_ok()])
    client, sleeps = make_client(lambda request: next(calls))
    text, meta = client.complete("mock", "m", "p", 1.0)
    assert text == ANSWER
    assert meta["attempts"] == 3
    assert sleeps[0] == 2.0
    assert 0 < sleeps[1] <= 0.02


def test_transport_errors_are_retried():
    state = {"n": 0}

    def handler(request):
        state["n"] += 1
        if state["n"] < 3:
            raise httpx.ConnectError("boom")
        return openai_ok()

    client, sleeps = make_client(handler)
    assert client.complete("mock", "m", "p", 1.0)[0] == ANSWER
    assert len(sleeps) == 2


def test_rate_limit_exhaustion():
    client, sleeps = make_client(lambda request: httpx.Response(429))
    with pytest.raises(RateLimitError) as info:
        client.complete("mock", "m", "p", 1.0)
    assert info.value.attempts == 4 and info.value.status_code == 429
    assert len(sleeps) == 3


def test_auth_failure_is_not_retried():
    client, sleeps = make_client(lambda request: httpx.Response(401))
    with pytest.raises(ProviderAuthError):
        client.complete("mock", "m", "p", 1.0)
    assert sleeps == []


def test_client_error_is_not_retried():
    client, sleeps = make_client(lambda request: httpx.Response(400, text="bad request"))
    with pytest.raises(ProviderError) as info:
        client.complete("mock", "m", "p", 1.0)
    assert info.value.status_code == 400 and sleeps == []


def test_missing_key(monkeypatch):
    monkeypatch.delenv("MOCK_KEY")
    client, _ = make_client(lambda request: openai_ok())
    with pytest.raises(ProviderAuthError):
        client.complete("mock", "m", "p", 1.0)


def test_temperature_range_enforced():
    client, _ = make_client(lambda request: openai_ok(), temperature_range=(0.0, 1.0))
    with pytest.raises(ConfigError):
        client.complete("mock", "m", "p", 1.5)


def test_anthropic_shape():
    seen = []

    def handler(request):
        seen.append(request)
        return httpx.Response(200, json={"content": [{"type": "text", "text": ANSWER}]})

    client, _ = make_client(handler, shape="anthropic_messages", auth_header="x-api-key", auth_prefix="",
                            max_tokens=4096, extra_headers={"anthropic-version": "2023-06-01"})
    text, meta = client.complete("mock", "claude", "hi", 1.0)
    assert text == ANSWER
    assert seen[0].headers["x-api-key"] == "secret"
    assert seen[0].headers["anthropic-version"] == "2023-06-01"
    assert json.loads(seen[0].content)["max_tokens"] == 4096


def test_bundled_providers_cover_every_model():
    providers = load_providers()
    for spec in MODEL_SPECS.values():
        cfg = providers[spec.provider]
        assert cfg.temperature_range == spec.temperature_range
    assert build_request(providers["anthropic"], "m", "p", 1.0)["max_tokens"] == 4096


def _live_agent():
    spec = MODEL_SPECS["deepseek-v3"]
    return AgentProfile(spec.model_id, Backend.LIVE_PROVIDER, spec.api_model, 1.0, spec.education_group,
                        1.0, spec.temperature_range, "mock")


def test_run_trial_records_failures(prefs, env):
    client, _ = make_client(lambda request: httpx.Response(500))
    ctx = TrialContext(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs), env,
                       solve_two_period(prefs, env), 1)
    record = run_trial(_live_agent(), ctx, prefs, client=client)
    assert record.error and record.parse_status is None and record.parsed_plan is None
    assert record.request_metadata["status_code"] == 500


def test_run_trial_live_success(prefs, env):
    client, _ = make_client(lambda request: openai_ok())
    ctx = TrialContext(PromptScenario.build(ScenarioKind.WITH_UTILITY, env, prefs), env,
                       solve_two_period(prefs, env), 1)
    record = run_trial(_live_agent(), ctx, prefs, client=client)
    assert record.parse_status is ParseStatus.OK
    assert record.parsed_plan.consumptions == (725000.0, 801000.0)


def test_run_aborts_when_provider_always_fails(calibration):
    client, _ = make_client(lambda request: httpx.Response(500))
    agent = _live_agent()
    plan = ExperimentPlan(ScenarioKind.WITH_UTILITY, [agent], {agent.education_group: calibration},
                          trials_per_agent=3)
    sunk = []
    with pytest.raises(RunAbortedError):
        run_scenario(plan, client=client, sink=sunk.append)
    assert len(sunk) == 3  # failed trials are still persisted


def test_partial_failures_do_not_abort(calibration):
    state = {"n": 0}

    def handler(request):
        state["n"] += 1
        return httpx.Response(400) if state["n"] == 1 else openai_ok()

    client, _ = make_client(handler)
    agent = _live_agent()
    plan = ExperimentPlan(ScenarioKind.WITH_UTILITY, [agent], {agent.education_group: calibration},
                          trials_per_agent=4)
    records = run_scenario(plan, client=client, max_workers=1)
    assert len(records) == 4
    assert sum(r.error is not None for r in records) == 1
