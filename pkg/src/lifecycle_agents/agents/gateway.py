"""One prompt/response round trip for any backend, recorded as a ``TrialRecord``."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from ..errors import ConfigError, ProviderError
from ..lifecycle import BudgetEnvironment, ConsumptionPlan, Preferences, Provenance, TaxPolicy
from .parsing import ParseStatus, parse_final_answer
from .personas import persona_generate
from .profiles import AgentProfile, Backend
from .prompts import PromptScenario, render_prompt
from .providers import LiveClient


@dataclass(frozen=True)
class TrialContext:
    """What a persona needs beyond the prompt text."""

    scenario: PromptScenario
    env: BudgetEnvironment
    optimum: ConsumptionPlan
    trial_index: int
    base_seed: int = 0


def invoke(agent: AgentProfile, prompt: str, *, context: TrialContext | None = None,
           client: LiveClient | None = None) -> tuple[str, dict]:
    """Send ``prompt`` to the agent and return ``(raw_text, request_metadata)``."""
    if agent.backend is Backend.PERSONA:
        if context is None:
            raise ConfigError("persona agents need a trial context")
        text = persona_generate(agent, context.scenario, context.optimum, context.env,
                                trial_index=context.trial_index, base_seed=context.base_seed)
        return text, {"provider": "persona", "model": agent.model_id, "attempts": 1}
    if client is None:
        raise ConfigError("live agents need a LiveClient")
    return client.complete(agent.provider, agent.model_id, prompt, agent.temperature)


@dataclass
class TrialRecord:
    trial_index: int
    agent: AgentProfile
    scenario: PromptScenario
    raw_response: str
    parse_status: ParseStatus | None
    parsed_plan: ConsumptionPlan | None
    environment: BudgetEnvironment
    preferences: Preferences
    optimum: ConsumptionPlan
    prompt_sha256: str = ""
    error: str | None = None
    timestamp: str = ""
    request_metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.parsed_plan is not None) != (self.parse_status is ParseStatus.OK):
            raise ValueError("parsed_plan must be present exactly when parse_status is ok")

    @property
    def ok(self) -> bool:
        return self.parse_status is ParseStatus.OK

    @property
    def tax_rate(self) -> float | None:
        return self.environment.tax.interest_tax_rate if self.environment.tax else None

    @property
    def sort_key(self) -> tuple:
        return (self.agent.agent_id, self.scenario.kind.value,
                -1.0 if self.tax_rate is None else self.tax_rate, self.trial_index)

    def to_dict(self) -> dict:
        env = self.environment
        return {
            "trial_index": self.trial_index,
            "agent": self.agent.to_dict(),
            "scenario": self.scenario.to_dict(),
            "prompt_sha256": self.prompt_sha256,
            "raw_response": self.raw_response,
            "parse_status": self.parse_status.value if self.parse_status else None,
            "parsed_plan": list(self.parsed_plan.consumptions) if self.parsed_plan else None,
            "error": self.error,
            "environment": {
                "initial_wealth": env.initial_wealth,
                "incomes": list(env.incomes),
                "period_rate": env.period_rate,
                "tax": asdict(env.tax) if env.tax else None,
            },
            "preferences": asdict(self.preferences),
            "optimum": list(self.optimum.consumptions),
            "timestamp": self.timestamp,
            "request_metadata": self.request_metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        e = d["environment"]
        env = BudgetEnvironment(e["initial_wealth"], tuple(e["incomes"]), e["period_rate"],
                                TaxPolicy(**e["tax"]) if e.get("tax") else None)
        status = ParseStatus(d["parse_status"]) if d.get("parse_status") else None
        plan = d.get("parsed_plan")
        return cls(
            trial_index=d["trial_index"],
            agent=AgentProfile.from_dict(d["agent"]),
            scenario=PromptScenario.from_dict(d["scenario"]),
            raw_response=d["raw_response"],
            parse_status=status,
            parsed_plan=ConsumptionPlan(tuple(plan), Provenance.AGENT_PARSED) if plan else None,
            environment=env,
            preferences=Preferences(**d["preferences"]),
            optimum=ConsumptionPlan(tuple(d["optimum"]), Provenance.ANALYTICAL),
            prompt_sha256=d.get("prompt_sha256", ""),
            error=d.get("error"),
            timestamp=d.get("timestamp", ""),
            request_metadata=d.get("request_metadata", {}),
        )


def run_trial(agent: AgentProfile, context: TrialContext, prefs: Preferences, *,
              client: LiveClient | None = None) -> TrialRecord:
    """Render, invoke with a fresh context, parse. Provider failures are recorded, not raised."""
    prompt = render_prompt(context.scenario)
    error = None
    status = None
    plan = None
    try:
        raw, meta = invoke(agent, prompt, context=context, client=client)
    except ProviderError as exc:
        raw = ""
        error = f"{type(exc).__name__}: {exc}"
        meta = {"provider": agent.provider, "model": agent.model_id,
                "attempts": exc.attempts, "status_code": exc.status_code}
    else:
        parsed = parse_final_answer(raw)
        status, plan = parsed.status, parsed.plan
    return TrialRecord(
        trial_index=context.trial_index,
        agent=agent,
        scenario=context.scenario,
        raw_response=raw,
        parse_status=status,
        parsed_plan=plan,
        environment=context.env,
        preferences=prefs,
        optimum=context.optimum,
        prompt_sha256=hashlib.sha256(prompt.encode()).hexdigest(),
        error=error,
        timestamp=datetime.now(timezone.utc).isoformat(),
        request_metadata=meta,
    )
