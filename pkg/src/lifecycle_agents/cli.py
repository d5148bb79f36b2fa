"""Command-line interface: calibrate, run, sweep-tax, evaluate, report, verify."""

from __future__ import annotations

import argparse
import logging
import re
import sys
import time
from collections import defaultdict
from pathlib import Path

from . import __version__
from .agents.gateway import TrialRecord
from .agents.profiles import Backend
from .agents.prompts import ScenarioKind
from .agents.providers import LiveClient, load_providers
from .config import RunConfig, load_config
from .errors import ConfigError, LifecycleError, ProviderAuthError, RunAbortedError, UndefinedMetricError
from .experiment import plan_from_config, run_scenario, sweep_from_records
from .figures import (
    distribution_box,
    metric_table_markdown,
    saving_rate_curves,
    scatter_budget,
    write_figure,
    write_metric_table,
)
from .metrics import evaluate
from .store import RunStore
from .verification import verify

logger = logging.getLogger("lifecycle_agents")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_CREDENTIALS = 4
EXIT_RUN_FAILED = 5
EXIT_NO_DATA = 6
EXIT_VERIFY_FAILED = 7


class NoDataError(Exception):
    pass


def _tax_grid(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("tax grid is empty")
    # accept percentages (0,10,...,100) as well as fractions
    if max(values) > 1:
        values = tuple(v / 100 for v in values)
    return values


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="population config (YAML); defaults to the bundled one")
    common.add_argument("--out", default="runs/default", help="run store directory (default: %(default)s)")
    common.add_argument("-v", "--verbose", action="store_true")

    running = argparse.ArgumentParser(add_help=False)
    running.add_argument("--mode", choices=[b.value for b in Backend] + ["live"], default="persona",
                         help="live providers or offline personas (default: %(default)s)")
    running.add_argument("--seed", type=int, help="base seed (default: from config)")
    running.add_argument("--trials", type=_positive_int, help="trials per agent (default: from config)")
    running.add_argument("--workers", type=_positive_int, help="parallel live requests")
    running.add_argument("--force", action="store_true", help="replace existing records for the scenario")

    p = argparse.ArgumentParser(prog="lifecycle-agents",
                                description="Two-period consumption choices by LLM agents and personas.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("calibrate", parents=[common], help="compute per-group two-period parameters")

    run = sub.add_parser("run", parents=[common, running], help="run a consumption scenario")
    run.add_argument("--scenario", choices=[ScenarioKind.WITH_UTILITY.value, ScenarioKind.GUT_FEELING.value],
                     default=ScenarioKind.WITH_UTILITY.value)

    sweep = sub.add_parser("sweep-tax", parents=[common, running], help="run the interest-tax sweep")
    sweep.add_argument("--tax-grid", type=_tax_grid, help="comma-separated rates, e.g. 0,0.1,...,1")
    sweep.add_argument("--statistic", choices=["mean", "median"], default="mean")

    sub.add_parser("evaluate", parents=[common], help="score stored records against the optimum")
    sub.add_parser("report", parents=[common], help="write figure data, SVGs and metric tables")

    ver = sub.add_parser("verify", help="run the solver and invariant self-checks")
    ver.add_argument("--draws", type=_positive_int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("-v", "--verbose", action="store_true")
    return p


# --- helpers -------------------------------------------------------------------

def _open_store(args, config: RunConfig) -> RunStore:
    store = RunStore(args.out)
    store.open(config.config_hash)
    return store


def _mode(args) -> Backend:
    return Backend.LIVE_PROVIDER if args.mode in ("live", Backend.LIVE_PROVIDER.value) else Backend.PERSONA


def _check_credentials(config: RunConfig, plan) -> LiveClient:
    providers = load_providers(config.providers_path)
    for agent in plan.agents:
        if agent.provider not in providers:
            raise ConfigError(f"no provider config for {agent.provider!r}")
        providers[agent.provider].api_key()
    return LiveClient(providers)


def _run(args, scenario: ScenarioKind, tax_grid=None) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    mode = _mode(args)
    plan = plan_from_config(config, scenario, mode, trials=args.trials, tax_grid=tax_grid, seed=args.seed)
    if scenario.value in store.scenario_kinds():
        if not args.force:
            raise ConfigError(f"{store.root} already holds {scenario.value} records; pass --force to replace them")
        store.drop_scenario(scenario.value)
    client = _check_credentials(config, plan) if mode is Backend.LIVE_PROVIDER else None
    start = time.perf_counter()
    records = []

    def sink(record: TrialRecord) -> None:
        records.append(record)
        store.append_record(record)

    status = "ok"
    try:
        run_scenario(plan, client=client, sink=sink, max_workers=args.workers)
    except RunAbortedError:
        status = "aborted"
        raise
    finally:
        if client is not None:
            client.close()
        store.log_command({
            "command": args.command, "scenario": scenario.value, "mode": mode.value,
            "seed": plan.base_seed, "trials": plan.trials_per_agent,
            "tax_grid": list(plan.tax_grid) if scenario is ScenarioKind.TAX_POLICY else None,
            "records": len(records), "status": status,
        })
    ok = sum(r.ok for r in records)
    failed = sum(r.error is not None for r in records)
    print(f"{scenario.value}: {len(records)} records ({ok} parsed, {failed} provider failures) "
          f"in {time.perf_counter() - start:.1f}s -> {store.path(store.RECORDS)}")
    return EXIT_OK


def _records(store: RunStore) -> list[TrialRecord]:
    records = store.records()
    if not records:
        raise NoDataError(f"no records in {store.root}; run `run` or `sweep-tax` first")
    return records


def _slices(records: list[TrialRecord]) -> dict[tuple[str, float | None], dict[str, list[TrialRecord]]]:
    """(scenario, tax rate) -> agent id -> records, in sorted order."""
    out: dict = defaultdict(lambda: defaultdict(list))
    for r in sorted(records, key=lambda r: r.sort_key):
        out[(r.scenario.kind.value, r.tax_rate)][r.agent.agent_id].append(r)
    return out


def evaluations_from(records: list[TrialRecord]) -> list[dict]:
    rows = []
    slices = _slices(records)
    def order(item):
        kind, tax = item[0]
        return kind, -1.0 if tax is None else tax

    for (kind, tax), by_agent in sorted(slices.items(), key=order):
        for agent_id, rs in by_agent.items():
            row = {"scenario": kind, "tax_rate": tax, "agent_id": agent_id,
                   "group": rs[0].agent.education_group.value, "n_total": len(rs),
                   "n_provider_errors": sum(r.error is not None for r in rs)}
            try:
                row["metrics"] = evaluate(rs, rs[0].optimum, rs[0].environment).to_dict()
            except UndefinedMetricError as exc:
                row["metrics"] = None
                row["undefined"] = str(exc)
            rows.append(row)
    return rows


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def _slice_name(kind: str, tax: float | None) -> str:
    return kind if tax is None else f"{kind}_tau{round(tax * 100):03d}"


# --- commands --------------------------------------------------------------------

def cmd_calibrate(args) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    cals = list(config.calibrations().values())
    store.write_calibrations(cals)
    store.log_command({"command": "calibrate", "groups": len(cals)})
    for c in cals:
        note = " (placeholder)" if c.placeholder else ""
        flags = f" flags={','.join(c.flags)}" if c.flags else ""
        print(f"{c.group_label:18s} w0={c.w0:>14,.1f} y1={c.y1:>14,.1f} y2={c.y2:>14,.1f} "
              f"beta={c.beta_period:.6f} r={c.rate_period:.6f}{note}{flags}")
    return EXIT_OK


def cmd_run(args) -> int:
    return _run(args, ScenarioKind(args.scenario))


def cmd_sweep(args) -> int:
    code = _run(args, ScenarioKind.TAX_POLICY, args.tax_grid)
    config = load_config(args.config)
    store = RunStore(args.out)
    tax_records = [r for r in store.records() if r.scenario.kind is ScenarioKind.TAX_POLICY]
    sweep = sweep_from_records(tax_records, config.shares(), statistic=args.statistic)
    store.write_json(store.SWEEP, sweep.to_dict())
    print("tax   aggregate(1-c1/(w0+y1))  aggregate(1-c1/y1)")
    for p in sweep.aggregate:
        print(f"{p.tax_rate:4.2f}  {p.wealth_inclusive:23.4f}  {p.income_only:18.4f}")
    return code


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    rows = evaluations_from(_records(store))
    store.write_evaluations(rows)
    store.log_command({"command": "evaluate", "rows": len(rows)})
    for kind, tax in dict.fromkeys((r["scenario"], r["tax_rate"]) for r in rows):
        part = [r for r in rows if r["scenario"] == kind and r["tax_rate"] == tax and r["metrics"]]
        print(metric_table_markdown(part, _slice_name(kind, tax)))
    return EXIT_OK


def cmd_report(args) -> int:
    config = load_config(args.config)
    store = _open_store(args, config)
    records = _records(store)
    out = store.figures_dir
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    slices = _slices(records)
    for (kind, tax), by_agent in slices.items():
        name = _slice_name(kind, tax)
        for agent_id, rs in by_agent.items():
            if any(r.ok for r in rs):
                written += write_figure(scatter_budget(rs, f"{agent_id} ({name})"), out,
                                        f"scatter_budget_{name}_{_slug(agent_id)}")
        flat = [r for rs in by_agent.values() for r in rs]
        if any(r.ok for r in flat):
            written += write_figure(distribution_box(flat, f"consumption distribution ({name})"), out,
                                    f"distribution_box_{name}")

    tax_records = [r for r in records if r.scenario.kind is ScenarioKind.TAX_POLICY]
    if tax_records:
        sweep = sweep_from_records(tax_records, config.shares())
        written += write_figure(saving_rate_curves(sweep), out, "saving_rate_curves")

    rows = evaluations_from(records)
    md = []
    for kind, tax in dict.fromkeys((r["scenario"], r["tax_rate"]) for r in rows):
        part = [r for r in rows if r["scenario"] == kind and r["tax_rate"] == tax and r["metrics"]]
        name = _slice_name(kind, tax)
        written.append(write_metric_table(part, out / f"metrics_{name}.csv"))
        md.append(metric_table_markdown(part, name))
    table = out / "metrics.md"
    table.write_text("\n".join(md))
    written.append(table)
    store.log_command({"command": "report", "files": len(written)})
    print(f"wrote {len(written)} files to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok, checks = verify(args.draws, args.seed)
    for c in checks:
        print(c.line())
    print("verify: ok" if ok else "verify: FAILED")
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


COMMANDS = {
    "calibrate": cmd_calibrate,
    "run": cmd_run,
    "sweep-tax": cmd_sweep,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help and --version exit 0; usage errors exit 2
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ProviderAuthError as exc:
        print(f"error: missing or rejected credentials: {exc}", file=sys.stderr)
        return EXIT_CREDENTIALS
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAbortedError as exc:
        print(f"error: run aborted: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    except NoDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    except LifecycleError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
