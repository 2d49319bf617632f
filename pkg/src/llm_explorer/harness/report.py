"""CSV reports over a directory of runs.

``export_report(root)`` reads every ``<root>/<run>/runlog.jsonl`` (with its
``config.json``), groups runs by variant label and writes:

- ``curves.csv``: variant, step, mean, std on the shared step grid
- ``costs.csv``: per-run model calls, tokens and cost
- ``summary.csv``: per-variant final mean/median and improvement % over the baseline
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from ..errors import EmptyInput, IoFailure
from ..llmclient.types import Pricing, Usage
from .metrics import CurveTable, aggregate_seeds, improvement_pct
from .runner import RunLog, read_runlog


@dataclass
class RunEntry:
    name: str
    variant: str
    seed: int
    explorer: str
    log: RunLog


def load_runs(root) -> list[RunEntry]:
    root = Path(root)
    if not root.is_dir():
        raise EmptyInput(f"{root} is not a directory")
    runs = []
    for log_path in sorted(root.glob("*/runlog.jsonl")):
        cfg_path = log_path.with_name("config.json")
        cfg = json.loads(cfg_path.read_text(encoding="utf-8")) if cfg_path.exists() else {}
        variant = cfg.get("variant") or (cfg.get("algo", "run") if cfg.get("explorer", "none") == "none"
                                         else f"{cfg.get('algo', 'run')}+llm")
        runs.append(RunEntry(log_path.parent.name, variant, int(cfg.get("seed", 0)), cfg.get("explorer", "none"),
                             read_runlog(log_path)))
    if not runs:
        raise EmptyInput(f"no runlog.jsonl files under {root}")
    return runs


def _series(log: RunLog, metric: str):
    return [r["steps"] for r in log.records], log.metric(metric)


@dataclass
class Report:
    tables: dict[str, CurveTable]
    baseline: str
    improvements: dict[str, float | None]
    files: dict[str, Path]

    def lines(self) -> list[str]:
        out = []
        for variant, table in self.tables.items():
            imp = self.improvements.get(variant)
            imp_text = "baseline" if variant == self.baseline else (
                "n/a" if imp is None else f"{imp:.2f}%")
            out.append(f"{variant}: final mean {table.final_mean:.4f}, median {table.final_median:.4f}, "
                       f"improvement {imp_text}")
        return out


def export_report(root, baseline: str | None = None, metric: str = "eval_return", out_dir=None,
                  pricing: Pricing = Pricing()) -> Report:
    runs = load_runs(root)
    out_dir = Path(out_dir) if out_dir is not None else Path(root)
    groups: dict[str, list[RunEntry]] = defaultdict(list)
    for run in runs:
        groups[run.variant].append(run)
    runs_with_data = {v: [r for r in rs if r.log.records] for v, rs in groups.items()}
    tables = {v: aggregate_seeds([_series(r.log, metric) for r in rs]) for v, rs in sorted(runs_with_data.items()) if rs}
    if not tables:
        raise EmptyInput("every run log is empty")
    if baseline is None:
        plain = sorted(v for v, rs in groups.items() if all(r.explorer == "none" for r in rs) and v in tables)
        baseline = plain[0] if plain else sorted(tables)[0]
    if baseline not in tables:
        raise EmptyInput(f"baseline variant {baseline!r} has no data")
    base_score = tables[baseline].final_mean
    improvements: dict[str, float | None] = {}
    for variant, table in tables.items():
        try:
            improvements[variant] = improvement_pct(base_score, table.final_mean)
        except ZeroDivisionError:
            improvements[variant] = None

    files = {name: out_dir / f"{name}.csv" for name in ("curves", "costs", "summary")}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with files["curves"].open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["variant", "step", "mean", "std"])
            for variant, table in tables.items():
                for step, m, s in zip(table.steps, table.mean, table.std):
                    w.writerow([variant, f"{step:.6g}", repr(float(m)), repr(float(s))])
        with files["costs"].open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "variant", "seed", "llm_calls", "prompt_tokens", "completion_tokens", "cost"])
            for run in runs:
                last = run.log.records[-1] if run.log.records else {}
                usage = Usage(int(last.get("tokens_in", 0)), int(last.get("tokens_out", 0)))
                w.writerow([run.name, run.variant, run.seed, int(last.get("llm_calls", 0)), usage.prompt_tokens,
                            usage.completion_tokens, f"{usage.cost(pricing):.6f}"])
        with files["summary"].open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["variant", "runs", "final_mean", "final_median", "improvement_pct"])
            for variant, table in tables.items():
                imp = improvements[variant]
                w.writerow([variant, len(table.finals), repr(table.final_mean), repr(table.final_median),
                            "" if imp is None else f"{imp:.2f}"])
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out_dir}: {exc}") from exc
    return Report(tables, baseline, improvements, files)
