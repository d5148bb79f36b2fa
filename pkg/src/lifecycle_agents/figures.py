"""Figure-ready data (CSV) and self-contained SVG renderings.

Three kinds: consumption scatter against the budget line, per-model box
statistics for c1 and c2, and saving-rate curves over the tax grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

from .agents.gateway import TrialRecord
from .errors import ConfigError
from .experiment import SweepResult

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


class FigureKind(str, Enum):
    SCATTER_BUDGET = "scatter_budget"
    DISTRIBUTION_BOX = "distribution_box"
    SAVING_RATE_CURVES = "saving_rate_curves"


@dataclass
class FigureData:
    kind: FigureKind
    title: str
    columns: dict[str, list]
    annotations: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()), []))


def _require(records: Sequence[TrialRecord]) -> list[TrialRecord]:
    if not records:
        raise ConfigError("no records to plot")
    return list(records)


def scatter_budget(records: Sequence[TrialRecord], title: str = "") -> FigureData:
    """One point per parsed trial plus budget-line endpoints and the optimum.

    All records must share one environment.
    """
    records = _require(records)
    env = records[0].environment
    W = env.lifetime_wealth
    ok = [r for r in records if r.ok]
    return FigureData(
        FigureKind.SCATTER_BUDGET,
        title or records[0].agent.agent_id,
        {
            "trial_index": [r.trial_index for r in ok],
            "c1": [r.parsed_plan.c1 for r in ok],
            "c2": [r.parsed_plan.c2 for r in ok],
        },
        {
            "budget_line": [[W, 0.0], [0.0, W * (1 + env.rate)]],
            "optimum": list(records[0].optimum.consumptions),
            "n_failed": len(records) - len(ok),
        },
    )


def box_stats(values: Sequence[float]) -> dict:
    """Quartiles, median and 1.5 x IQR whiskers; points beyond are outliers."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = (float(x) for x in np.percentile(v, [25, 50, 75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return {
        "q1": q1, "median": med, "q3": q3,
        "whisker_low": float(inside.min()), "whisker_high": float(inside.max()),
        "outliers": [float(x) for x in v[(v < lo_fence) | (v > hi_fence)]],
        "n": int(v.size),
    }


def distribution_box(records: Sequence[TrialRecord], title: str = "") -> FigureData:
    records = _require(records)
    by_agent: dict[str, list[TrialRecord]] = {}
    for r in records:
        if r.ok:
            by_agent.setdefault(r.agent.agent_id, []).append(r)
    if not by_agent:
        raise ConfigError("no parsed trials to summarise")
    cols: dict[str, list] = {k: [] for k in
                             ("agent_id", "period", "n", "q1", "median", "q3", "whisker_low", "whisker_high",
                              "n_outliers")}
    outliers = {}
    for agent_id, rs in by_agent.items():
        for period, values in (("c1", [r.parsed_plan.c1 for r in rs]), ("c2", [r.parsed_plan.c2 for r in rs])):
            s = box_stats(values)
            cols["agent_id"].append(agent_id)
            cols["period"].append(period)
            for k in ("n", "q1", "median", "q3", "whisker_low", "whisker_high"):
                cols[k].append(s[k])
            cols["n_outliers"].append(len(s["outliers"]))
            outliers[f"{agent_id}:{period}"] = s["outliers"]
    return FigureData(FigureKind.DISTRIBUTION_BOX, title or "consumption distribution", cols,
                      {"outliers": outliers, "optimum": {r.agent.agent_id: list(r.optimum.consumptions)
                                                         for r in records}})


def saving_rate_curves(sweep: SweepResult, title: str = "") -> FigureData:
    cols: dict[str, list] = {"tax_rate": list(sweep.tax_grid)}
    for d in ("wealth_inclusive", "income_only"):
        for group in sweep.shares:
            agent_id = sweep.groups[(group, sweep.tax_grid[0])].agent_id
            cols[f"{d}:{agent_id}"] = sweep.group_curve(group, d)
        cols[f"{d}:aggregate"] = sweep.aggregate_curve(d)
        for sigma, path in sorted(sweep.references.items(), reverse=True):
            by_tau = {p.tax_rate: p for p in path}
            cols[f"{d}:reference_sigma_{sigma:g}"] = [
                getattr(by_tau[t], f"rate_{d}") if t in by_tau else math.nan for t in sweep.tax_grid
            ]
    return FigureData(FigureKind.SAVING_RATE_CURVES, title or "saving rate vs interest tax", cols,
                      {"definitions": {"wealth_inclusive": "1 - c1/(w0 + y1)", "income_only": "1 - c1/y1"},
                       "shares": {g.value: s for g, s in sweep.shares.items()}})


def write_csv(fig: FigureData, path: str | Path) -> Path:
    path = Path(path)
    names = list(fig.columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for i in range(fig.n_rows):
            w.writerow([fig.columns[n][i] for n in names])
    return path


# --- SVG -----------------------------------------------------------------------

class _Canvas:
    W, H = 640, 440
    LEFT, RIGHT, TOP, BOTTOM = 80, 170, 40, 60

    def __init__(self, x_range, y_range, title, xlabel, ylabel):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" height="{self.H}" '
            f'viewBox="0 0 {self.W} {self.H}" font-family="sans-serif" font-size="11">',
            f'<rect width="{self.W}" height="{self.H}" fill="white"/>',
            f'<text x="{self.W / 2 - self.RIGHT / 2 + self.LEFT / 2}" y="22" text-anchor="middle" '
            f'font-size="14">{escape(title)}</text>',
        ]
        self._axes(xlabel, ylabel)

    @property
    def pw(self):
        return self.W - self.LEFT - self.RIGHT

    @property
    def ph(self):
        return self.H - self.TOP - self.BOTTOM

    def sx(self, x):
        return self.LEFT + (x - self.x0) / ((self.x1 - self.x0) or 1) * self.pw

    def sy(self, y):
        return self.TOP + self.ph - (y - self.y0) / ((self.y1 - self.y0) or 1) * self.ph

    def _axes(self, xlabel, ylabel):
        L, T, pw, ph = self.LEFT, self.TOP, self.pw, self.ph
        self.parts.append(f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>')
        for i in range(6):
            fx = self.x0 + (self.x1 - self.x0) * i / 5
            fy = self.y0 + (self.y1 - self.y0) * i / 5
            self.parts.append(f'<text x="{self.sx(fx):.1f}" y="{T + ph + 16}" text-anchor="middle">{_tick(fx)}</text>')
            self.parts.append(f'<text x="{L - 6}" y="{self.sy(fy) + 4:.1f}" text-anchor="end">{_tick(fy)}</text>')
        self.parts.append(f'<text x="{L + pw / 2}" y="{self.H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
        self.parts.append(f'<text transform="translate(16,{T + ph / 2}) rotate(-90)" '
                          f'text-anchor="middle">{escape(ylabel)}</text>')

    def line(self, pts, color="#333", width=1.5, dash=None):
        pts = [(x, y) for x, y in pts if not (math.isnan(x) or math.isnan(y))]
        if len(pts) < 2:
            return
        d = " ".join(f"{self.sx(x):.1f},{self.sy(y):.1f}" for x, y in pts)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>')

    def dot(self, x, y, color, r=3.5):
        self.parts.append(f'<circle cx="{self.sx(x):.1f}" cy="{self.sy(y):.1f}" r="{r}" fill="{color}" '
                          f'fill-opacity="0.75"/>')

    def rect(self, x0, y0, x1, y1, color):
        X0, X1 = sorted((self.sx(x0), self.sx(x1)))
        Y0, Y1 = sorted((self.sy(y0), self.sy(y1)))
        self.parts.append(f'<rect x="{X0:.1f}" y="{Y0:.1f}" width="{X1 - X0:.1f}" height="{Y1 - Y0:.1f}" '
                          f'fill="{color}" fill-opacity="0.35" stroke="{color}"/>')

    def legend(self, items):
        x = self.W - self.RIGHT + 12
        for i, (label, color, dash) in enumerate(items):
            y = self.TOP + 10 + 16 * i
            extra = f' stroke-dasharray="{dash}"' if dash else ""
            self.parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 18}" y2="{y}" stroke="{color}" '
                              f'stroke-width="2"{extra}/>')
            self.parts.append(f'<text x="{x + 24}" y="{y + 4}">{escape(label)}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _tick(v: float) -> str:
    a = abs(v)
    if a >= 1e6:
        return f"{v / 1e6:.2f}M"
    if a >= 1e3:
        return f"{v / 1e3:.0f}k"
    return f"{v:.2f}"


def _padded(lo, hi, frac=0.05):
    span = (hi - lo) or (abs(hi) or 1.0)
    return lo - frac * span, hi + frac * span


def render_svg(fig: FigureData) -> str:
    if fig.kind is FigureKind.SCATTER_BUDGET:
        (W, _), (_, Wr) = fig.annotations["budget_line"]
        c1s, c2s = fig.columns["c1"], fig.columns["c2"]
        o1, o2 = fig.annotations["optimum"]
        cv = _Canvas((0, max([W] + c1s) * 1.05), (0, max([Wr] + c2s) * 1.05),
                     fig.title, "c1 (working period)", "c2 (retirement period)")
        cv.line([(W, 0), (0, Wr)], "#333")
        cv.line([(o1, 0), (o1, o2)], "#888", 1, "4,3")
        cv.line([(0, o2), (o1, o2)], "#888", 1, "4,3")
        for x, y in zip(c1s, c2s):
            cv.dot(x, y, PALETTE[0])
        cv.legend([("budget line", "#333", None), ("optimum", "#888", "4,3"), ("trials", PALETTE[0], None)])
        return cv.render()

    if fig.kind is FigureKind.DISTRIBUTION_BOX:
        cols = fig.columns
        n = len(cols["agent_id"])
        lows = cols["whisker_low"] + [v for vs in fig.annotations["outliers"].values() for v in vs]
        highs = cols["whisker_high"] + [v for vs in fig.annotations["outliers"].values() for v in vs]
        cv = _Canvas((0, n + 1), _padded(min(lows), max(highs)), fig.title, "model : period", "consumption")
        for i in range(n):
            x = i + 1
            color = PALETTE[0] if cols["period"][i] == "c1" else PALETTE[1]
            cv.line([(x, cols["whisker_low"][i]), (x, cols["q1"][i])], color, 1)
            cv.line([(x, cols["q3"][i]), (x, cols["whisker_high"][i])], color, 1)
            cv.rect(x - 0.3, cols["q1"][i], x + 0.3, cols["q3"][i], color)
            cv.line([(x - 0.3, cols["median"][i]), (x + 0.3, cols["median"][i])], "#000", 2)
            for v in fig.annotations["outliers"][f"{cols['agent_id'][i]}:{cols['period'][i]}"]:
                cv.dot(x, v, color, 2.5)
            cv.parts.append(f'<text x="{cv.sx(x):.1f}" y="{cv.TOP + cv.ph + 30}" text-anchor="middle" '
                            f'font-size="8">{escape(cols["agent_id"][i][:12])}:{cols["period"][i]}</text>')
        cv.legend([("c1", PALETTE[0], None), ("c2", PALETTE[1], None)])
        return cv.render()

    if fig.kind is FigureKind.SAVING_RATE_CURVES:
        return render_curves_svg(fig, "wealth_inclusive")
    raise ValueError(f"unknown figure kind {fig.kind}")


def render_curves_svg(fig: FigureData, definition: str) -> str:
    taus = fig.columns["tax_rate"]
    series = {k.split(":", 1)[1]: v for k, v in fig.columns.items() if k.startswith(definition + ":")}
    vals = [v for vs in series.values() for v in vs if not math.isnan(v)]
    label = fig.annotations["definitions"][definition]
    cv = _Canvas((min(taus), max(taus)), _padded(min(vals), max(vals)),
                 f"{fig.title} ({label})", "interest tax rate", "saving rate")
    legend = []
    i = 0
    for name, vs in series.items():
        if name == "aggregate":
            color, width, dash = "#000", 3, None
        elif name.startswith("reference"):
            color, width, dash = "#666", 1.5, "6,4" if name.endswith("_2") else "2,3"
        else:
            color, width, dash = PALETTE[i % len(PALETTE)], 1.5, None
            i += 1
        cv.line(list(zip(taus, vs)), color, width, dash)
        legend.append((name, color, dash))
    cv.legend(legend)
    return cv.render()


def write_figure(fig: FigureData, directory: str | Path, stem: str) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = [write_csv(fig, directory / f"{stem}.csv")]
    if fig.kind is FigureKind.SAVING_RATE_CURVES:
        for d in ("wealth_inclusive", "income_only"):
            p = directory / f"{stem}_{d}.svg"
            p.write_text(render_curves_svg(fig, d))
            out.append(p)
    else:
        p = directory / f"{stem}.svg"
        p.write_text(render_svg(fig))
        out.append(p)
    return out


# --- metric table --------------------------------------------------------------

TABLE_COLUMNS = (
    "Model",
    "Accuracy (5% tolerance) (%)",
    "Mean Absolute Percentage Deviation (%)",
    "VarAPD (x10^4)",
    "MAPD to Budget Constraint (%)",
)


def table_rows(evaluations: Sequence[dict]) -> list[list]:
    """One row per evaluation record, in the order given.

    VarAPD is the variance of the fractional APD scaled by 10^4.
    """
    rows = []
    for e in evaluations:
        m = e["metrics"]
        rows.append([
            e["agent_id"],
            round(100 * m["accuracy_5pct"], 2),
            round(100 * m["mapd"], 2),
            round(m["var_apd_x1e4_fraction_units"], 2),
            round(100 * m["budget_mapd"], 2),
        ])
    return rows


def metric_table_markdown(evaluations: Sequence[dict], title: str = "") -> str:
    lines = [f"### {title}", ""] if title else []
    lines.append("| " + " | ".join(TABLE_COLUMNS) + " |")
    lines.append("|" + "|".join("---" for _ in TABLE_COLUMNS) + "|")
    for row in table_rows(evaluations):
        lines.append("| " + " | ".join(f"{v:.2f}" if isinstance(v, float) else str(v) for v in row) + " |")
    return "\n".join(lines) + "\n"


def write_metric_table(evaluations: Sequence[dict], path_csv: str | Path) -> Path:
    path_csv = Path(path_csv)
    with open(path_csv, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        w.writerows(table_rows(evaluations))
    return path_csv
