"""Agent backends: prompt rendering, live providers, offline personas, answer parsing."""

from .gateway import TrialContext, TrialRecord, invoke, run_trial
from .parsing import ParseResult, ParseStatus, parse_final_answer
from .personas import calibrate_persona, default_persona, persona_generate
from .profiles import (
    DEFAULT_SHARES,
    MODEL_SPECS,
    AgentProfile,
    Backend,
    EducationGroup,
    PersonaParams,
    default_agents,
)
from .prompts import PromptScenario, ScenarioKind, render_prompt
from .providers import LiveClient, ProviderConfig, load_providers

__all__ = [
    "AgentProfile",
    "Backend",
    "DEFAULT_SHARES",
    "EducationGroup",
    "LiveClient",
    "MODEL_SPECS",
    "ParseResult",
    "ParseStatus",
    "PersonaParams",
    "PromptScenario",
    "ProviderConfig",
    "ScenarioKind",
    "TrialContext",
    "TrialRecord",
    "calibrate_persona",
    "default_agents",
    "default_persona",
    "invoke",
    "load_providers",
    "parse_final_answer",
    "persona_generate",
    "render_prompt",
    "run_trial",
]
