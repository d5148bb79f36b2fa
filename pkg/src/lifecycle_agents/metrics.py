"""Scores for a set of trials against the analytical optimum, and a motive tagger."""

from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import UndefinedMetricError
from .lifecycle import BudgetEnvironment, ConsumptionPlan, budget_residual


class AccuracyMode(str, Enum):
    PER_TRIAL_JOINT = "per_trial_joint"
    PER_COORDINATE = "per_coordinate"


@dataclass(frozen=True)
class TrialSetEvaluation:
    accuracy_5pct: float
    accuracy_5pct_per_coordinate: float
    mapd: float
    var_apd: float
    """Sample variance of APD in percentage points squared."""
    var_apd_fraction: float
    budget_mapd: float
    n_valid: int
    n_total: int

    @property
    def parse_failure_rate(self) -> float:
        return 1 - self.n_valid / self.n_total if self.n_total else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["parse_failure_rate"] = self.parse_failure_rate
        # the two VarAPD readings: fraction units x 1e4, and pp^2 x 1e4
        d["var_apd_x1e4_fraction_units"] = self.var_apd_fraction * 1e4
        d["var_apd_x1e4_percent_units"] = self.var_apd * 1e4
        return d


def valid_plans(trials: Iterable) -> tuple[list[ConsumptionPlan], int]:
    """Parsed plans and the total trial count.

    Accepts ``ConsumptionPlan`` objects, ``None`` for failed parses, or
    anything with a ``parsed_plan`` attribute (``TrialRecord``).
    """
    plans, total = [], 0
    for t in trials:
        total += 1
        plan = getattr(t, "parsed_plan", t)
        if plan is not None:
            plans.append(plan)
    return plans, total


def _require(plans: Sequence, minimum: int = 1) -> None:
    if len(plans) < minimum:
        raise UndefinedMetricError(f"need at least {minimum} valid trial(s), got {len(plans)}")


def _deviations(plans: Sequence[ConsumptionPlan], optimum: ConsumptionPlan) -> np.ndarray:
    if any(not c > 0 for c in optimum.consumptions):
        raise UndefinedMetricError("optimum must be strictly positive")
    got = np.array([p.consumptions for p in plans], dtype=float)
    ref = np.array(optimum.consumptions, dtype=float)
    return np.abs(got - ref) / ref


def absolute_percentage_deviations(trials: Iterable, optimum: ConsumptionPlan) -> np.ndarray:
    """Per-trial APD as a fraction: mean of the two relative coordinate errors."""
    plans, _ = valid_plans(trials)
    _require(plans)
    return _deviations(plans, optimum).mean(axis=1)


def accuracy(trials: Iterable, optimum: ConsumptionPlan, tolerance: float = 0.05,
             mode: AccuracyMode | str = AccuracyMode.PER_TRIAL_JOINT) -> float:
    plans, _ = valid_plans(trials)
    _require(plans)
    dev = _deviations(plans, optimum)
    if AccuracyMode(mode) is AccuracyMode.PER_COORDINATE:
        return float((dev <= tolerance).mean())
    return float((dev.max(axis=1) <= tolerance).mean())


def mapd(trials: Iterable, optimum: ConsumptionPlan) -> float:
    return float(absolute_percentage_deviations(trials, optimum).mean())


def var_apd(trials: Iterable, optimum: ConsumptionPlan, ddof: int = 1,
            percent: bool = True) -> float:
    """Variance of per-trial APD, in percentage points squared unless ``percent`` is false."""
    apd = absolute_percentage_deviations(trials, optimum)
    if len(apd) < ddof + 1:
        raise UndefinedMetricError(f"need at least {ddof + 1} valid trials for VarAPD")
    if percent:
        apd = apd * 100
    return float(np.var(apd, ddof=ddof))


def budget_mapd(trials: Iterable, env: BudgetEnvironment) -> float:
    plans, _ = valid_plans(trials)
    _require(plans)
    return math.fsum(abs(budget_residual(env, p)) for p in plans) / len(plans)


def evaluate(trials: Sequence, optimum: ConsumptionPlan, env: BudgetEnvironment,
             tolerance: float = 0.05) -> TrialSetEvaluation:
    plans, total = valid_plans(trials)
    _require(plans)
    enough = len(plans) >= 2
    return TrialSetEvaluation(
        accuracy_5pct=accuracy(plans, optimum, tolerance),
        accuracy_5pct_per_coordinate=accuracy(plans, optimum, tolerance, AccuracyMode.PER_COORDINATE),
        mapd=mapd(plans, optimum),
        var_apd=var_apd(plans, optimum) if enough else float("nan"),
        var_apd_fraction=var_apd(plans, optimum, percent=False) if enough else float("nan"),
        budget_mapd=budget_mapd(plans, env),
        n_valid=len(plans),
        n_total=total,
    )


# --- motives ---------------------------------------------------------------

class Motive(str, Enum):
    CONSUMPTION_SMOOTHING = "consumption smoothing"
    INTERTEMPORAL_SUBSTITUTION = "intertemporal substitution"
    PRECAUTIONARY_SAVING = "precautionary saving"
    HIGHER_MARGINAL_UTILITY = "higher marginal utility of consumption"
    DECREASED_MPC = "decreased marginal propensity to consume"
    LIFE_CYCLE_SPENDING_SHIFTS = "life-cycle spending shifts"
    LIFE_CYCLE_PEAK_CONSUMPTION = "life-cycle peak consumption"
    RISK_AVERSION = "risk aversion"
    HEDONIC_CONSUMPTION = "hedonic consumption"
    INFLATION = "inflation"
    INTEREST_RATE_RISK = "interest rate risk"
    BEQUEST_MOTIVE = "bequest motive"
    PARENTAL_ALTRUISM = "parental altruism"
    DYNASTIC_UTILITY = "dynastic utility optimization"
    PRESENT_BIAS = "present bias"


PHRASE_BANK: dict[Motive, tuple[str, ...]] = {
    Motive.CONSUMPTION_SMOOTHING: (
        r"\bbalanc\w*", r"smooth\w*", r"even out", r"stable (?:standard of living|consumption)",
    ),
    Motive.INTERTEMPORAL_SUBSTITUTION: (
        r"high(?:er)? (?:interest|return)", r"take advantage of (?:the )?(?:high )?interest",
        r"intertemporal substitution", r"interest rates? (?:is|are|makes?) (?:very )?(?:attractive|generous)",
    ),
    Motive.PRECAUTIONARY_SAVING: (
        r"buffer", r"precaution\w*", r"health (?:issues|problems|costs)", r"uncertaint\w*",
        r"rainy days?", r"未雨绸缪", r"unexpected (?:expenses|medical)",
    ),
    Motive.HIGHER_MARGINAL_UTILITY: (
        r"active lifestyle", r"higher marginal utility",
    ),
    Motive.DECREASED_MPC: (
        r"lower (?:needs|expenses|spending) in retirement", r"need less in retirement",
        r"decreased marginal propensity",
    ),
    Motive.LIFE_CYCLE_SPENDING_SHIFTS: (
        r"rising (?:living|medical) costs", r"living costs? (?:will )?(?:rise|increase)",
        r"costs? of living",
    ),
    Motive.LIFE_CYCLE_PEAK_CONSUMPTION: (
        r"peak (?:consumption|spending|expenses)", r"children'?s education", r"mortgage",
    ),
    Motive.RISK_AVERSION: (
        r"risk[- ]aver\w*", r"chinese culture", r"culture \w+ (?:emphasi[sz]es|values) sav\w*",
        r"future income risks?", r"save against",
    ),
    Motive.HEDONIC_CONSUMPTION: (
        r"deserve", r"work(?:ing)? hard", r"enjoy (?:life|the fruits)",
    ),
    Motive.INFLATION: (
        r"inflation", r"prices? (?:will |may |might |could )?(?:go up|rise|increase)",
    ),
    Motive.INTEREST_RATE_RISK: (
        r"interest rates? (?:might|may|could) (?:change|fall|drop)", r"\bscam\b",
        r"too good to be true", r"interest rate risk",
    ),
    Motive.BEQUEST_MOTIVE: (
        r"future generations", r"bequest", r"inheritance", r"leave (?:something|money|an estate)",
    ),
    Motive.PARENTAL_ALTRUISM: (
        r"burden (?:on|to) (?:my |our )?(?:children|kids|family)",
    ),
    Motive.DYNASTIC_UTILITY: (
        r"help (?:my |our )?(?:children|kids)", r"support (?:my |our )?(?:children|kids)",
        r"dynastic",
    ),
    Motive.PRESENT_BIAS: (
        r"life is short", r"present bias", r"(?:don't|do not) know what the future holds",
        r"live in the moment",
    ),
}

_COMPILED = {m: [re.compile(p, re.IGNORECASE) for p in ps] for m, ps in PHRASE_BANK.items()}


@dataclass(frozen=True)
class MotiveTag:
    label: Motive
    matched_phrases: tuple[str, ...]


def tag_motives(raw_response: str) -> list[MotiveTag]:
    """Motives mentioned in a response, ordered by first mention."""
    found = []
    for motive, patterns in _COMPILED.items():
        spans = sorted(
            (m.start(), m.group(0)) for p in patterns for m in p.finditer(raw_response or "")
        )
        if spans:
            found.append((spans[0][0], MotiveTag(motive, tuple(dict.fromkeys(s for _, s in spans)))))
    found.sort(key=lambda x: x[0])
    return [tag for _, tag in found]
