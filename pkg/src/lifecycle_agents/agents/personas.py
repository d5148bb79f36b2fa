"""Seeded offline agents that answer like a model with a given error profile.

A persona perturbs the analytical optimum:

    c1 = c1* (1 + bias_c1 - underconsumption_bias + eps),  eps ~ N(0, noise_sd)
    c2 = (W - c1) (1 + r) (1 - slack),  slack ~ underconsumption_bias * U(0, 2)

so ``c2`` exhausts what is left of the budget minus a random slack, and then
writes the result into a conforming "Final Answer" sentence.
"""

from __future__ import annotations

import hashlib
from dataclasses import replace
from functools import lru_cache

import numpy as np

from ..lifecycle import BudgetEnvironment, ConsumptionPlan, Preferences, solve_two_period
from .profiles import MODEL_SPECS, AgentProfile, PersonaParams, spec_for_agent
from .prompts import PromptScenario, ScenarioKind

_CALIBRATION_DRAWS = 20_000
_CALIBRATION_SEED = 20_241_120


def _stable_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def trial_rng(params: PersonaParams, agent_id: str, trial_index: int, base_seed: int) -> np.random.Generator:
    """Generator keyed by (base seed, agent, trial); no state carries between trials."""
    seq = np.random.SeedSequence([base_seed, params.seed, _stable_key(agent_id), trial_index])
    return np.random.Generator(np.random.PCG64(seq))


def perturbed_plan(params: PersonaParams, optimum: ConsumptionPlan, env: BudgetEnvironment,
                   eps, u):
    """Vectorised persona decision for standard-normal ``eps`` and uniform ``u`` draws."""
    eps = np.asarray(eps, dtype=float)
    u = np.asarray(u, dtype=float)
    r = env.rate
    scale = 1 + params.bias_c1 - params.underconsumption_bias + params.noise_sd * eps
    c1 = optimum.c1 * np.clip(scale, 1e-6, None)
    slack = np.clip(params.underconsumption_bias * 2 * u, 0.0, 1.0)
    # (W - c1)(1 + r) written relative to the optimum, so zero noise reproduces it exactly
    c2 = np.clip((optimum.c2 + (optimum.c1 - c1) * (1 + r)) * (1 - slack), 0.0, None)
    return c1, c2


def _expected_metrics(params: PersonaParams, optimum: ConsumptionPlan, env: BudgetEnvironment,
                      eps: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    c1, c2 = perturbed_plan(params, optimum, env, eps, u)
    apd = (np.abs(c1 / optimum.c1 - 1) + np.abs(c2 / optimum.c2 - 1)) / 2
    W = env.lifetime_wealth
    budget = np.abs((c1 + c2 / (1 + env.rate) - W) / W)
    return float(apd.mean()), float(budget.mean())


def _bisect(f, lo: float, hi: float, iters: int = 60) -> float:
    """Root of an increasing ``f`` on ``[lo, hi]``, clamped to the ends."""
    if f(lo) >= 0:
        return lo
    if f(hi) <= 0:
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def calibrate_persona(target_mapd: float, prefs: Preferences, env: BudgetEnvironment, *,
                      target_budget_mapd: float | None = None, bias_c1: float = 0.0,
                      seed: int = 0) -> PersonaParams:
    """Choose ``noise_sd`` (and ``underconsumption_bias``) to hit expected MAPD targets.

    Expectations are taken over a fixed sample of common random numbers, so
    the result is deterministic. If the bias terms alone already exceed the
    MAPD target, ``noise_sd`` is zero.
    """
    optimum = solve_two_period(prefs, env)
    rng = np.random.default_rng(_CALIBRATION_SEED)
    eps = rng.standard_normal(_CALIBRATION_DRAWS)
    u = rng.random(_CALIBRATION_DRAWS)
    params = PersonaParams(bias_c1=bias_c1, seed=seed)

    def mapd_gap(sd):
        return _expected_metrics(replace(params, noise_sd=sd), optimum, env, eps, u)[0] - target_mapd

    def budget_gap(ub):
        return _expected_metrics(replace(params, underconsumption_bias=ub), optimum, env, eps, u)[1] - target_budget_mapd

    for _ in range(1 if target_budget_mapd is None else 25):
        previous = params
        if target_budget_mapd is not None:
            params = replace(params, underconsumption_bias=_bisect(budget_gap, 0.0, 0.95))
        params = replace(params, noise_sd=_bisect(mapd_gap, 0.0, 3.0))
        if (abs(params.noise_sd - previous.noise_sd) < 1e-9
                and abs(params.underconsumption_bias - previous.underconsumption_bias) < 1e-9):
            break
    return params


@lru_cache(maxsize=256)
def default_persona(model_id: str, prefs: Preferences, env: BudgetEnvironment,
                    seed: int = 0) -> PersonaParams:
    """Persona shaped after the model's published accuracy profile."""
    spec = MODEL_SPECS[model_id]
    return calibrate_persona(spec.scores.mapd, prefs, env,
                             target_budget_mapd=spec.scores.budget_mapd, seed=seed)


def _motive_table(agent: AgentProfile) -> list[tuple[str, str, float]]:
    spec = spec_for_agent(agent)
    overrides = agent.persona.motive_frequencies if agent.persona else None
    table = []
    for phrase, label, count in spec.motives:
        p = count / 16
        if overrides is not None:
            p = overrides.get(label, 0.0 if label != "consumption smoothing" else 1.0)
        table.append((phrase, label, p))
    return table


def format_amount(x: float) -> str:
    # shortest round-tripping digits, positional (never exponent form), comma grouped
    digits = np.format_float_positional(float(x), unique=True, trim="-")
    whole, _, frac = digits.partition(".")
    return f"{int(whole):,}" + (f".{frac}" if frac else "")


_OPENERS = (
    "Let me think about how to split my resources between the two periods.",
    "I need to weigh what I can spend now against what I will need later.",
    "Looking at my savings, my income and the interest rate, here is my plan.",
)


def persona_generate(agent: AgentProfile, scenario: PromptScenario, optimum: ConsumptionPlan,
                     env: BudgetEnvironment, *, trial_index: int = 0, base_seed: int = 0) -> str:
    """Synthetic response for one trial; deterministic in (seeds, agent, trial)."""
    params = agent.persona or PersonaParams()
    rng = trial_rng(params, agent.agent_id, trial_index, base_seed)
    eps, u = rng.standard_normal(), rng.random()
    c1, c2 = perturbed_plan(params, optimum, env, eps, u)
    c1, c2 = float(c1), float(c2)
    reasons = [phrase for phrase, _, p in _motive_table(agent) if rng.random() < p]
    if not reasons:
        reasons = ["I want a balance between both periods"]
    opener = _OPENERS[int(rng.integers(len(_OPENERS)))]
    if scenario.kind is ScenarioKind.TAX_POLICY:
        context = (f"With interest taxed at {scenario.tax_rate_percent:g}%, "
                   f"my savings grow by less than the headline rate.")
    elif scenario.kind is ScenarioKind.WITH_UTILITY:
        context = "I use the stated preferences and the budget constraint to guide the split."
    else:
        context = "I go with my instinct about what feels right for each stage of life."
    because = ", and ".join(reasons)
    return (
        f"{opener} {context}\n\n"
        f"Final Answer: I will choose to consume {format_amount(c1)} units during my working period "
        f"and {format_amount(c2)} units during my retirement period because {because}."
    )
