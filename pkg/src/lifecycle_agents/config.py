"""Population and run configuration files (YAML)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .agents.profiles import MODEL_SPECS, EducationGroup, PersonaParams
from .calibration import (
    AgeGroupIncomeTable,
    CalibratedParameters,
    GrowthAssumptions,
    calibrate,
)
from .errors import ConfigError, LifecycleError

DEFAULT_TAX_GRID = tuple(round(0.1 * i, 1) for i in range(11))


@dataclass(frozen=True)
class GroupConfig:
    label: EducationGroup
    share: float
    model: str
    placeholder: bool = False
    calibrated: dict | None = None
    income_table: AgeGroupIncomeTable | None = None
    temperature: float | None = None
    persona: PersonaParams | None = None

    def calibration(self, assumptions: GrowthAssumptions) -> CalibratedParameters:
        if self.income_table is not None:
            return calibrate(self.income_table, assumptions, self.label.value)
        c = self.calibrated
        return CalibratedParameters(
            w0=float(c["w0"]), y1=float(c["y1"]), y2=float(c["y2"]),
            beta_period=assumptions.period_discount,
            sigma=assumptions.sigma,
            rate_period=assumptions.period_rate,
            group_label=self.label.value,
            placeholder=self.placeholder,
        )


@dataclass(frozen=True)
class RunConfig:
    groups: tuple[GroupConfig, ...]
    assumptions: GrowthAssumptions = field(default_factory=GrowthAssumptions)
    seed: int = 0
    trials_per_agent: int = 16
    tax_grid: tuple[float, ...] = DEFAULT_TAX_GRID
    rebate_on_borrowing: bool = True
    providers_path: str | None = None
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)

    def calibrations(self) -> dict[EducationGroup, CalibratedParameters]:
        return {g.label: g.calibration(self.assumptions) for g in self.groups}

    def shares(self) -> dict[EducationGroup, float]:
        return {g.label: g.share for g in self.groups}


def config_hash(raw: dict) -> str:
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _group(raw: dict) -> GroupConfig:
    try:
        label = EducationGroup(raw["label"])
        model = raw["model"]
        share = float(raw["share"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad group entry {raw!r}: {exc}") from exc
    if model not in MODEL_SPECS:
        raise ConfigError(f"unknown model {model!r}; known: {sorted(MODEL_SPECS)}")
    table = None
    if "income_table" in raw:
        t = raw["income_table"]
        table = AgeGroupIncomeTable(tuple(t["group_means"]), float(t["overall_mean"]))
    elif "calibrated" not in raw:
        raise ConfigError(f"group {label.value} needs either `calibrated` or `income_table`")
    persona = PersonaParams(**raw["persona"]) if raw.get("persona") else None
    return GroupConfig(label, share, model, bool(raw.get("placeholder", False)),
                       raw.get("calibrated"), table, raw.get("temperature"), persona)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict) or not raw.get("groups"):
        raise ConfigError("config needs a non-empty `groups` list")
    try:
        groups = tuple(_group(g) for g in raw["groups"])
        assumptions = GrowthAssumptions(**raw.get("assumptions", {}))
        grid = tuple(float(t) for t in raw.get("tax_grid", DEFAULT_TAX_GRID))
        cfg = RunConfig(
            groups=groups,
            assumptions=assumptions,
            seed=int(raw.get("seed", 0)),
            trials_per_agent=int(raw.get("trials_per_agent", 16)),
            tax_grid=grid,
            rebate_on_borrowing=bool(raw.get("rebate_on_borrowing", True)),
            providers_path=raw.get("providers"),
            raw=raw,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, LifecycleError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    labels = [g.label for g in groups]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate education group in config")
    return cfg


def load_config(path: str | Path | None = None) -> RunConfig:
    if path is None:
        text = (resources.files("lifecycle_agents") / "data" / "population.yaml").read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return parse_config(raw)
