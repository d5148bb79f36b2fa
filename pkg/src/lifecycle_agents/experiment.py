"""Trial protocols, the interest-tax sweep and population aggregation."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .agents.gateway import TrialContext, TrialRecord, run_trial
from .agents.personas import default_persona
from .agents.profiles import MODEL_SPECS, AgentProfile, Backend, EducationGroup
from .agents.prompts import PromptScenario, ScenarioKind
from .agents.providers import LiveClient
from .calibration import CalibratedParameters, published_calibration
from .config import DEFAULT_TAX_GRID, RunConfig
from .errors import ConfigError, RunAbortedError
from .lifecycle import BudgetEnvironment, Preferences, saving_rates, solve_two_period

logger = logging.getLogger(__name__)

REFERENCE_SIGMAS = (2.0, 0.5)


@dataclass
class ExperimentPlan:
    scenario: ScenarioKind
    agents: list[AgentProfile]
    calibrations: dict[EducationGroup, CalibratedParameters]
    trials_per_agent: int = 16
    tax_grid: tuple[float, ...] = DEFAULT_TAX_GRID
    base_seed: int = 0
    rebate_on_borrowing: bool = True

    def __post_init__(self) -> None:
        self.scenario = ScenarioKind(self.scenario)
        self.tax_grid = tuple(float(t) for t in self.tax_grid)
        if self.trials_per_agent < 1:
            raise ConfigError("trials_per_agent must be at least 1")
        if not self.agents:
            raise ConfigError("plan has no agents")
        if any(not 0 <= t <= 1 for t in self.tax_grid):
            raise ConfigError("tax grid values must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.tax_grid, self.tax_grid[1:])):
            raise ConfigError("tax grid must be strictly increasing")
        if self.scenario is ScenarioKind.TAX_POLICY and not self.tax_grid:
            raise ConfigError("tax sweep needs a non-empty tax grid")
        missing = {a.education_group for a in self.agents} - set(self.calibrations)
        if missing:
            raise ConfigError(f"no calibration for groups: {sorted(g.value for g in missing)}")

    def tax_points(self) -> tuple[float | None, ...]:
        return self.tax_grid if self.scenario is ScenarioKind.TAX_POLICY else (None,)

    @property
    def expected_records(self) -> int:
        return len(self.agents) * self.trials_per_agent * len(self.tax_points())


def build_agents(config: RunConfig, mode: Backend | str = Backend.PERSONA) -> list[AgentProfile]:
    """One agent per configured group; personas default to the model's published error profile."""
    mode = Backend(mode)
    calibrations = config.calibrations()
    flagged = sorted(c.group_label for c in calibrations.values() if c.w0 < 0)
    if flagged:
        raise ConfigError(f"negative initial wealth for {flagged}; the two-period problem needs w0 >= 0")
    agents = []
    for g in config.groups:
        spec = MODEL_SPECS[g.model]
        persona = None
        if mode is Backend.PERSONA:
            persona = g.persona
            if persona is None:
                cal = calibrations[g.label]
                persona = default_persona(g.model, cal.preferences(), cal.environment())
        agents.append(AgentProfile(
            agent_id=g.model,
            backend=mode,
            model_id=g.model if mode is Backend.PERSONA else spec.api_model,
            temperature=spec.temperature if g.temperature is None else g.temperature,
            education_group=g.label,
            population_share=g.share,
            temperature_range=spec.temperature_range,
            provider=spec.provider,
            persona=persona,
        ))
    return agents


def plan_from_config(config: RunConfig, scenario: ScenarioKind | str,
                     mode: Backend | str = Backend.PERSONA, *,
                     trials: int | None = None, tax_grid: Sequence[float] | None = None,
                     seed: int | None = None) -> ExperimentPlan:
    return ExperimentPlan(
        scenario=ScenarioKind(scenario),
        agents=build_agents(config, mode),
        calibrations=config.calibrations(),
        trials_per_agent=config.trials_per_agent if trials is None else trials,
        tax_grid=tuple(config.tax_grid if tax_grid is None else tax_grid),
        base_seed=config.seed if seed is None else seed,
        rebate_on_borrowing=config.rebate_on_borrowing,
    )


def _contexts(plan: ExperimentPlan) -> list[tuple[AgentProfile, TrialContext, Preferences]]:
    jobs = []
    for agent in plan.agents:
        cal = plan.calibrations[agent.education_group]
        prefs = cal.preferences()
        for tax in plan.tax_points():
            env = cal.environment(tax, plan.rebate_on_borrowing)
            scenario = PromptScenario.build(plan.scenario, env, prefs)
            optimum = solve_two_period(prefs, env)
            for k in range(1, plan.trials_per_agent + 1):
                jobs.append((agent, TrialContext(scenario, env, optimum, k, plan.base_seed), prefs))
    return jobs


def run_scenario(plan: ExperimentPlan, *, client: LiveClient | None = None,
                 sink: Callable[[TrialRecord], None] | None = None,
                 max_workers: int | None = None) -> list[TrialRecord]:
    """Run every agent x tax point x trial; returns records sorted by (agent, tax, trial).

    Failed provider calls are kept as records with ``error`` set. Raises
    ``RunAbortedError`` (after all records reach ``sink``) when some live
    provider failed every one of its trials.
    """
    jobs = _contexts(plan)
    live = any(a.backend is Backend.LIVE_PROVIDER for a in plan.agents)
    if live and client is None:
        client = LiveClient()

    def one(job):
        agent, ctx, prefs = job
        return run_trial(agent, ctx, prefs, client=client)

    if live:
        workers = max_workers or max(1, sum(c.max_parallel for c in client.providers.values()))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, jobs))
    else:
        records = [one(job) for job in jobs]
    records.sort(key=lambda r: r.sort_key)
    if sink is not None:
        for r in records:
            sink(r)

    by_provider: dict[str, list[TrialRecord]] = defaultdict(list)
    for r in records:
        if r.agent.backend is Backend.LIVE_PROVIDER:
            by_provider[r.agent.provider].append(r)
    dead = sorted(p for p, rs in by_provider.items() if all(r.error for r in rs))
    if dead:
        raise RunAbortedError(f"every trial failed for provider(s): {', '.join(dead)}")
    return records


# --- saving rates -------------------------------------------------------------

@dataclass(frozen=True)
class ReferencePoint:
    tax_rate: float
    c1: float
    c2: float
    rate_wealth_inclusive: float
    rate_income_only: float


def reference_path(prefs: Preferences, env: BudgetEnvironment,
                   tax_grid: Sequence[float] = DEFAULT_TAX_GRID,
                   rebate_on_borrowing: bool = True) -> list[ReferencePoint]:
    out = []
    for tau in tax_grid:
        taxed = env.with_tax(tau, rebate_on_borrowing)
        plan = solve_two_period(prefs, taxed)
        w, y = saving_rates(taxed, plan)
        out.append(ReferencePoint(float(tau), plan.c1, plan.c2, w, y))
    return out


def reference_paths(calibration: CalibratedParameters | None = None,
                    tax_grid: Sequence[float] = DEFAULT_TAX_GRID,
                    sigmas: Sequence[float] = REFERENCE_SIGMAS) -> dict[float, list[ReferencePoint]]:
    cal = calibration or published_calibration()
    return {
        s: reference_path(Preferences(s, cal.beta_period), cal.environment(), tax_grid)
        for s in sigmas
    }


@dataclass(frozen=True)
class Spread:
    mean: float
    median: float
    minimum: float
    maximum: float
    q1: float
    q3: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Spread":
        v = np.asarray(values, dtype=float)
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        return cls(float(v.mean()), float(med), float(v.min()), float(v.max()), float(q1), float(q3))


@dataclass(frozen=True)
class GroupRates:
    """Trial-level saving rates of one group at one tax rate."""

    group: EducationGroup
    agent_id: str
    tax_rate: float
    wealth_inclusive: tuple[float, ...]
    income_only: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.wealth_inclusive)

    def summary(self, definition: str = "wealth_inclusive") -> Spread:
        return Spread.of(getattr(self, definition))

    def center(self, definition: str = "wealth_inclusive", statistic: str = "mean") -> float:
        s = self.summary(definition)
        return s.median if statistic == "median" else s.mean


def group_rates(records: Iterable[TrialRecord]) -> dict[tuple[EducationGroup, float], GroupRates]:
    """Saving rates per (group, tax rate) from parsed trials; failures are skipped."""
    acc: dict[tuple, tuple[str, list, list]] = {}
    for r in records:
        if not r.ok:
            continue
        key = (r.agent.education_group, r.tax_rate if r.tax_rate is not None else 0.0)
        w, y = saving_rates(r.environment, r.parsed_plan)
        entry = acc.setdefault(key, (r.agent.agent_id, [], []))
        entry[1].append(w)
        entry[2].append(y)
    return {
        key: GroupRates(key[0], agent_id, key[1], tuple(ws), tuple(ys))
        for key, (agent_id, ws, ys) in sorted(acc.items(), key=lambda kv: (kv[0][0].value, kv[0][1]))
    }


@dataclass(frozen=True)
class AggregatePoint:
    tax_rate: float
    wealth_inclusive: float
    income_only: float
    band_wealth_inclusive: Spread
    band_income_only: Spread


@dataclass
class SweepResult:
    tax_grid: tuple[float, ...]
    shares: dict[EducationGroup, float]
    groups: dict[tuple[EducationGroup, float], GroupRates]
    aggregate: list[AggregatePoint]
    references: dict[float, list[ReferencePoint]] = field(default_factory=dict)
    statistic: str = "mean"

    def group_curve(self, group: EducationGroup, definition: str = "wealth_inclusive") -> list[float]:
        return [self.groups[(group, t)].center(definition, self.statistic) for t in self.tax_grid]

    def aggregate_curve(self, definition: str = "wealth_inclusive") -> list[float]:
        return [getattr(p, definition) for p in self.aggregate]

    def to_dict(self) -> dict:
        def spread(s: Spread) -> dict:
            return s.__dict__.copy()

        return {
            "tax_grid": list(self.tax_grid),
            "statistic": self.statistic,
            "shares": {g.value: s for g, s in self.shares.items()},
            "groups": [
                {
                    "group": gr.group.value,
                    "agent_id": gr.agent_id,
                    "tax_rate": gr.tax_rate,
                    "n": gr.n,
                    "wealth_inclusive": spread(gr.summary("wealth_inclusive")),
                    "income_only": spread(gr.summary("income_only")),
                }
                for gr in self.groups.values()
            ],
            "aggregate": [
                {
                    "tax_rate": p.tax_rate,
                    "wealth_inclusive": p.wealth_inclusive,
                    "income_only": p.income_only,
                    "band_wealth_inclusive": spread(p.band_wealth_inclusive),
                    "band_income_only": spread(p.band_income_only),
                }
                for p in self.aggregate
            ],
            "references": {
                str(s): [p.__dict__.copy() for p in path] for s, path in self.references.items()
            },
        }


def aggregate_population(results: dict[tuple[EducationGroup, float], GroupRates],
                         shares: dict[EducationGroup, float], *,
                         statistic: str = "mean",
                         references: dict[float, list[ReferencePoint]] | None = None) -> SweepResult:
    """Share-weighted saving rate at each tax rate.

    Every group with a share must be present at every tax rate; nothing is
    renormalised.
    """
    total = math.fsum(shares.values())
    if abs(total - 1) > 1e-9:
        raise ConfigError(f"shares sum to {total}, expected 1")
    grid = tuple(sorted({t for _, t in results}))
    for tau in grid:
        missing = [g.value for g in shares if (g, tau) not in results]
        if missing:
            raise ConfigError(f"no results for {missing} at tax rate {tau}")
    points = []
    for tau in grid:
        parts = [results[(g, tau)] for g in shares]
        agg = {}
        for d in ("wealth_inclusive", "income_only"):
            agg[d] = math.fsum(shares[gr.group] * gr.center(d, statistic) for gr in parts)
        pooled_w = [v for gr in parts for v in gr.wealth_inclusive]
        pooled_y = [v for gr in parts for v in gr.income_only]
        points.append(AggregatePoint(tau, agg["wealth_inclusive"], agg["income_only"],
                                     Spread.of(pooled_w), Spread.of(pooled_y)))
    kept = {k: v for k, v in results.items() if k[0] in shares}
    return SweepResult(grid, dict(shares), kept, points, references or {}, statistic)


def sweep_from_records(records: Sequence[TrialRecord], shares: dict[EducationGroup, float] | None = None,
                       reference_calibration: CalibratedParameters | None = None,
                       statistic: str = "mean") -> SweepResult:
    """Aggregate tax-sweep records and attach the sigma = 2 and 0.5 reference paths."""
    tax_records = [r for r in records if r.scenario.kind is ScenarioKind.TAX_POLICY]
    if not tax_records:
        raise ConfigError("no tax-sweep records")
    if shares is None:
        shares = {}
        for r in tax_records:
            shares[r.agent.education_group] = r.agent.population_share
    grid = sorted({r.tax_rate for r in tax_records})
    refs = reference_paths(reference_calibration, grid)
    return aggregate_population(group_rates(tax_records), shares, statistic=statistic, references=refs)
