"""Run directory: a manifest plus line-delimited JSON records.

Layout::

    <root>/manifest.json       run id, config hash, code version, command log
    <root>/calibration.jsonl   one CalibratedParameters per line
    <root>/records.jsonl       one TrialRecord per line, append-only
    <root>/evaluations.jsonl   one metric record per (agent, scenario, tax rate)
    <root>/sweep.json          aggregated tax sweep
    <root>/figures/            CSV + SVG figure data, metric tables
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from . import __version__
from .agents.gateway import TrialRecord
from .calibration import CalibratedParameters
from .errors import ConfigError


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _json_default(obj):
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, default=_json_default)


class RunStore:
    MANIFEST = "manifest.json"
    RECORDS = "records.jsonl"
    CALIBRATION = "calibration.jsonl"
    EVALUATIONS = "evaluations.jsonl"
    SWEEP = "sweep.json"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def path(self, name: str) -> Path:
        return self.root / name

    @property
    def figures_dir(self) -> Path:
        return self.root / "figures"

    # manifest ---------------------------------------------------------------

    def manifest(self) -> dict:
        p = self.path(self.MANIFEST)
        return json.loads(p.read_text()) if p.exists() else {}

    def open(self, config_hash: str) -> dict:
        """Create the run directory or check it was produced by the same config."""
        self.root.mkdir(parents=True, exist_ok=True)
        m = self.manifest()
        if m:
            if m["config_hash"] != config_hash:
                raise ConfigError(
                    f"{self.root} was produced by config {m['config_hash'][:12]}, "
                    f"not {config_hash[:12]}; use a fresh --out directory")
            return m
        m = {
            "run_id": hashlib.sha256(config_hash.encode()).hexdigest()[:16],
            "config_hash": config_hash,
            "code_version": __version__,
            "created_at": utc_now(),
            "commands": [],
        }
        self._write_manifest(m)
        return m

    def log_command(self, entry: dict) -> None:
        m = self.manifest()
        m.setdefault("commands", []).append({**entry, "at": utc_now()})
        m["updated_at"] = utc_now()
        self._write_manifest(m)

    def _write_manifest(self, m: dict) -> None:
        tmp = self.path(self.MANIFEST + ".tmp")
        tmp.write_text(json.dumps(m, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, self.path(self.MANIFEST))

    # records ----------------------------------------------------------------

    def append_record(self, record: TrialRecord) -> None:
        line = dumps(record.to_dict()) + "\n"
        with self._lock, open(self.path(self.RECORDS), "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()

    def read_jsonl(self, name: str) -> list[dict]:
        p = self.path(name)
        if not p.exists():
            return []
        out = []
        with open(p, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    out.append(json.loads(line))
                except json.JSONDecodeError:
                    # a torn final line from an interrupted writer
                    continue
        return out

    def records(self) -> list[TrialRecord]:
        return [TrialRecord.from_dict(d) for d in self.read_jsonl(self.RECORDS)]

    def scenario_kinds(self) -> set[str]:
        return {d["scenario"]["kind"] for d in self.read_jsonl(self.RECORDS)}

    def drop_scenario(self, kind: str) -> None:
        kept = [d for d in self.read_jsonl(self.RECORDS) if d["scenario"]["kind"] != kind]
        self._rewrite(self.RECORDS, kept)

    def _rewrite(self, name: str, rows: Iterable[dict]) -> None:
        tmp = self.path(name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(dumps(row) + "\n")
        os.replace(tmp, self.path(name))

    # derived files ------------------------------------------------------------

    def write_calibrations(self, cals: Iterable[CalibratedParameters]) -> None:
        self._rewrite(self.CALIBRATION, (c.to_dict() for c in cals))

    def calibrations(self) -> list[CalibratedParameters]:
        return [CalibratedParameters.from_dict(d) for d in self.read_jsonl(self.CALIBRATION)]

    def write_evaluations(self, rows: Iterable[dict]) -> None:
        self._rewrite(self.EVALUATIONS, rows)

    def evaluations(self) -> list[dict]:
        return self.read_jsonl(self.EVALUATIONS)

    def write_json(self, name: str, obj) -> None:
        tmp = self.path(name + ".tmp")
        tmp.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
        os.replace(tmp, self.path(name))
