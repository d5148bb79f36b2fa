"""Agent profiles and the default five-model population."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

from ..errors import ConfigError


class Backend(str, Enum):
    LIVE_PROVIDER = "live_provider"
    PERSONA = "persona"


class EducationGroup(str, Enum):
    COLLEGE_4YR_PLUS = "college_4yr_plus"
    COLLEGE_3YR = "college_3yr"
    SENIOR_HIGH = "senior_high"
    JUNIOR_HIGH = "junior_high"
    PRIMARY = "primary"


@dataclass(frozen=True)
class PersonaParams:
    """Offline stand-in behaviour, all magnitudes as fractions of the optimum.

    ``motive_frequencies`` maps motive labels to per-trial inclusion
    probabilities; ``None`` uses the model's default motive table.
    """

    bias_c1: float = 0.0
    noise_sd: float = 0.0
    underconsumption_bias: float = 0.0
    seed: int = 0
    motive_frequencies: dict[str, float] | None = None

    def __post_init__(self) -> None:
        if self.noise_sd < 0 or self.underconsumption_bias < 0:
            raise ConfigError("noise_sd and underconsumption_bias must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AgentProfile:
    agent_id: str
    backend: Backend
    model_id: str
    temperature: float
    education_group: EducationGroup
    population_share: float
    temperature_range: tuple[float, float] = (0.0, 2.0)
    provider: str | None = None
    persona: PersonaParams | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "backend", Backend(self.backend))
        object.__setattr__(self, "education_group", EducationGroup(self.education_group))
        object.__setattr__(self, "temperature_range", tuple(float(t) for t in self.temperature_range))
        if isinstance(self.persona, dict):
            object.__setattr__(self, "persona", PersonaParams(**self.persona))
        lo, hi = self.temperature_range
        if not lo <= self.temperature <= hi:
            raise ConfigError(
                f"temperature {self.temperature} outside {self.temperature_range} for {self.agent_id}")
        if not 0 <= self.population_share <= 1:
            raise ConfigError(f"population share must lie in [0, 1], got {self.population_share}")
        if self.backend is Backend.LIVE_PROVIDER and not self.provider:
            raise ConfigError(f"live agent {self.agent_id} needs a provider")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["backend"] = self.backend.value
        d["education_group"] = self.education_group.value
        d["temperature_range"] = list(self.temperature_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AgentProfile":
        return cls(**d)


@dataclass(frozen=True)
class MetricProfile:
    """Published per-model scores: accuracy, MAPD and budget MAPD as fractions."""

    accuracy: float
    mapd: float
    var_apd_x1e4: float
    budget_mapd: float


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    display_name: str
    provider: str
    api_model: str
    temperature: float
    temperature_range: tuple[float, float]
    education_group: EducationGroup
    population_share: float
    scores: MetricProfile
    # (reason as the persona says it, motive label, count out of 16)
    motives: tuple[tuple[str, str, int], ...] = field(default=())


SMOOTHING = ("I want a balance between both periods", "consumption smoothing", 16)
HIGH_INTEREST = "saving lets me take advantage of high interest rates"
HEALTH = "uncertainties like health issues in retirement call for savings"
LOWER_NEEDS = "I expect lower needs in retirement"
RISING_COSTS = "rising living costs in retirement worry me"
PEAK = "my peak consumption needs fall in the working period"
ACTIVE = "an active lifestyle during working years matters to me"
CULTURE = "Chinese culture emphasizes saving"
DESERVE = "I work hard and deserve to consume in my working period"
NOT_BURDEN = "I do not want to be a burden on my children"

MODEL_SPECS: dict[str, ModelSpec] = {
    spec.model_id: spec
    for spec in (
        ModelSpec(
            "deepseek-v3", "DeepSeek-V3", "deepseek", "deepseek-chat", 1.0, (0.0, 2.0),
            EducationGroup.COLLEGE_4YR_PLUS, 0.11,
            MetricProfile(0.9063, 0.0194, 32.61, 0.0095),
            (
                SMOOTHING,
                (HIGH_INTEREST, "intertemporal substitution", 7),
                ("I want to have a buffer during retirement", "precautionary saving", 2),
                (ACTIVE, "higher marginal utility of consumption", 1),
            ),
        ),
        ModelSpec(
            "gpt-4o", "GPT-4o", "openai", "gpt-4o-2024-11-20", 1.0, (0.0, 1.0),
            EducationGroup.COLLEGE_3YR, 0.12,
            MetricProfile(0.5625, 0.0733, 81.75, 0.0196),
            (
                SMOOTHING,
                (HIGH_INTEREST, "intertemporal substitution", 9),
                (HEALTH, "precautionary saving", 4),
                (LOWER_NEEDS, "decreased marginal propensity to consume", 3),
                (RISING_COSTS, "life-cycle spending shifts", 2),
                (PEAK, "life-cycle peak consumption", 2),
                ("I should save against future income risks", "risk aversion", 1),
            ),
        ),
        ModelSpec(
            "gemini-1.5-pro", "Gemini-1.5-pro", "gemini", "gemini-1.5-pro-002", 1.0, (0.0, 2.0),
            EducationGroup.SENIOR_HIGH, 0.24,
            MetricProfile(0.5000, 0.1095, 214.76, 0.0668),
            (
                SMOOTHING,
                ("prices will go up", "inflation", 8),
                (HIGH_INTEREST, "intertemporal substitution", 5),
                (CULTURE, "risk aversion", 4),
                (DESERVE, "hedonic consumption", 4),
                ("interest rates might change, and such a return could be a scam", "interest rate risk", 3),
                (RISING_COSTS, "life-cycle spending shifts", 2),
                (ACTIVE, "higher marginal utility of consumption", 2),
                (HEALTH, "precautionary saving", 2),
                ("something should be left over for future generations", "bequest motive", 2),
                (LOWER_NEEDS, "decreased marginal propensity to consume", 1),
                (NOT_BURDEN, "parental altruism", 1),
            ),
        ),
        ModelSpec(
            "claude-3.5-sonnet", "Claude-3.5-sonnet", "anthropic", "claude-3-5-sonnet-20241022", 1.0, (0.0, 1.0),
            EducationGroup.JUNIOR_HIGH, 0.35,
            MetricProfile(0.1250, 0.1709, 90.70, 0.1326),
            (
                SMOOTHING,
                (CULTURE + " (未雨绸缪)", "risk aversion", 13),
                (HIGH_INTEREST, "intertemporal substitution", 12),
                (RISING_COSTS, "life-cycle spending shifts", 10),
                (PEAK, "life-cycle peak consumption", 7),
                (ACTIVE, "higher marginal utility of consumption", 5),
                (HEALTH, "precautionary saving", 4),
                (LOWER_NEEDS, "decreased marginal propensity to consume", 3),
                (NOT_BURDEN, "parental altruism", 3),
                ("I want to help my children in the future", "dynastic utility optimization", 1),
            ),
        ),
        ModelSpec(
            "llama-3.1-405b", "Llama-3.1-405B", "together", "meta-llama/Meta-Llama-3.1-405B-Instruct-Turbo",
            0.2, (0.0, 1.0),
            EducationGroup.PRIMARY, 0.18,
            MetricProfile(0.0357, 0.3135, 266.06, 0.3066),
            (
                SMOOTHING,
                (HIGH_INTEREST, "intertemporal substitution", 9),
                (LOWER_NEEDS, "decreased marginal propensity to consume", 3),
                (DESERVE, "hedonic consumption", 2),
                (RISING_COSTS, "life-cycle spending shifts", 1),
                ("life is short, and I don't know what the future holds", "present bias", 1),
            ),
        ),
    )
}

DEFAULT_SHARES: dict[EducationGroup, float] = {
    spec.education_group: spec.population_share for spec in MODEL_SPECS.values()
}


def model_for_group(group: EducationGroup | str) -> ModelSpec:
    group = EducationGroup(group)
    for spec in MODEL_SPECS.values():
        if spec.education_group is group:
            return spec
    raise ConfigError(f"no model mapped to {group.value}")


def check_shares(agents: list[AgentProfile], tol: float = 1e-9) -> None:
    total = math.fsum(a.population_share for a in agents)
    if abs(total - 1) > tol:
        raise ConfigError(f"population shares sum to {total}, expected 1")


def default_agents(backend: Backend | str = Backend.PERSONA,
                   personas: dict[str, PersonaParams] | None = None) -> list[AgentProfile]:
    backend = Backend(backend)
    agents = []
    for spec in MODEL_SPECS.values():
        persona = None
        if backend is Backend.PERSONA:
            persona = (personas or {}).get(spec.model_id, PersonaParams())
        agents.append(AgentProfile(
            agent_id=spec.model_id,
            backend=backend,
            model_id=spec.model_id if backend is Backend.PERSONA else spec.api_model,
            temperature=spec.temperature,
            education_group=spec.education_group,
            population_share=spec.population_share,
            temperature_range=spec.temperature_range,
            provider=spec.provider,
            persona=persona,
        ))
    return agents


def spec_for_agent(agent: AgentProfile) -> ModelSpec:
    if agent.agent_id in MODEL_SPECS:
        return MODEL_SPECS[agent.agent_id]
    for spec in MODEL_SPECS.values():
        if agent.model_id in (spec.model_id, spec.api_model):
            return spec
    return model_for_group(agent.education_group)
