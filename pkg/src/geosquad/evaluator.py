"""Metrics over traces and golds: tool-call correctness, MSPE, vision scores.

correctness_rate is |LCS(executed, gold)| / |gold| over (agent, tool,
normalized args) triples: extra interleaved calls are free but order is
enforced.  MSPE charges each gold datapoint the agent failed to access as
a full (100%) relative error: eps = 100 * (1/|G|) * sum(e_g^2) with e_g in
{0, 1}; extra accessed points are free unless penalize_extras is set (an
off-by-default diagnostic excluded from headline numbers).
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import (
    DataPointKey,
    ExecutionTrace,
    GoldSolution,
    ToolCall,
    args_match,
)
from .errors import GeoSquadError

RASTER_METRICS = (
    "ndvi", "ref_b2", "aod550", "lst", "built_s", "population", "treeloss", "canopy",
)

CSV_COLUMNS = (
    "strategy", "ts", "wm", "tasks", "correctness_rate_pct", "avg_tokens_k",
    "eps_ndvi", "eps_ref_b2", "eps_aod550", "eps_lst", "eps_built_s",
    "eps_population", "eps_treeloss", "eps_canopy", "lcc_acc_pct", "det_f1_pct",
    "completed", "context_overflow",
)


class EmptyGold(GeoSquadError):
    """MSPE requested for a product with no gold datapoints."""


@dataclass(frozen=True)
class TaskScore:
    task_id: str
    correctness: float
    epsilon_by_metric: Mapping[str, float]
    tokens: int
    terminal: str

    def __post_init__(self):
        object.__setattr__(self, "epsilon_by_metric", dict(self.epsilon_by_metric))
        if not 0.0 <= self.correctness <= 1.0:
            raise ValueError("correctness must be within [0, 1]")
        if any(v < 0 for v in self.epsilon_by_metric.values()):
            raise ValueError("epsilon values must be nonnegative")


@dataclass(frozen=True)
class BenchmarkReport:
    strategy: str
    ts: bool
    wm: bool
    tasks: int
    correctness_rate: float
    avg_tokens_k: float
    epsilon_by_metric: Mapping[str, float | None]
    lcc_accuracy: float | None
    det_f1: float | None
    terminal_counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "epsilon_by_metric", dict(self.epsilon_by_metric))
        object.__setattr__(self, "terminal_counts", dict(self.terminal_counts))


# --- Correctness -----------------------------------------------------------


def _triples(calls: Iterable[ToolCall]) -> list[tuple[str, str, Mapping]]:
    return [(c.agent, c.tool, c.args) for c in calls]


def _triple_eq(a: tuple, b: tuple) -> bool:
    return a[0] == b[0] and a[1] == b[1] and args_match(a[2], b[2])


def lcs_length(xs: Sequence, ys: Sequence, eq=lambda a, b: a == b) -> int:
    """Classic O(len(xs)*len(ys)) dynamic program with a custom comparator
    (argument tolerance breaks hashing, so no speedups that need it)."""
    previous = [0] * (len(ys) + 1)
    for x in xs:
        current = [0]
        for j, y in enumerate(ys):
            if eq(x, y):
                current.append(previous[j] + 1)
            else:
                current.append(max(current[j], previous[j + 1]))
        previous = current
    return previous[len(ys)]


def correctness_rate(executed: Sequence[ToolCall], gold: GoldSolution) -> float:
    if not gold.steps:
        raise ValueError("gold solution has no steps")
    gold_triples = [(s.agent_name, s.tool_name, s.canonical_args) for s in gold.steps]
    matched = lcs_length(_triples(executed), gold_triples, eq=_triple_eq)
    return matched / len(gold.steps)


# --- MSPE -------------------------------------------------------------------


def mspe(
    accessed: Iterable[DataPointKey],
    gold_set: Iterable[DataPointKey],
    product: str,
    penalize_extras: bool = False,
) -> float:
    accessed = set(accessed)
    relevant = {k for k in gold_set if k.product == product}
    if not relevant:
        raise EmptyGold(f"gold set has no {product} datapoints")
    missing = sum(1 for key in relevant if key not in accessed)
    extras = 0
    if penalize_extras:
        extras = sum(1 for key in accessed if key.product == product and key not in relevant)
    return 100.0 * (missing + extras) / len(relevant)


def score_task(trace: ExecutionTrace, gold: GoldSolution) -> TaskScore:
    accessed = trace.accessed_datapoints()
    products = sorted({k.product for k in gold.gold_datapoints})
    epsilon = {p: mspe(accessed, gold.gold_datapoints, p) for p in products}
    return TaskScore(
        task_id=trace.task_id,
        correctness=correctness_rate(trace.executed_steps, gold),
        epsilon_by_metric=epsilon,
        tokens=trace.token_usage.total_tokens,
        terminal=trace.terminal,
    )


# --- Vision scores -----------------------------------------------------------


def box_iou(a: Sequence[float], b: Sequence[float]) -> float:
    ix0, iy0 = max(a[0], b[0]), max(a[1], b[1])
    ix1, iy1 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix1 - ix0), max(0.0, iy1 - iy0)
    inter = iw * ih
    if inter == 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def match_boxes(
    predicted: Sequence[Sequence[float]],
    truth: Sequence[Sequence[float]],
    iou_threshold: float = 0.5,
) -> tuple[int, int, int]:
    """Greedy-by-IoU matching; returns (tp, fp, fn)."""
    pairs = sorted(
        (
            (box_iou(p, t), i, j)
            for i, p in enumerate(predicted)
            for j, t in enumerate(truth)
        ),
        key=lambda x: (-x[0], x[1], x[2]),
    )
    used_p: set[int] = set()
    used_t: set[int] = set()
    tp = 0
    for iou, i, j in pairs:
        if iou < iou_threshold:
            break
        if i in used_p or j in used_t:
            continue
        used_p.add(i)
        used_t.add(j)
        tp += 1
    return tp, len(predicted) - tp, len(truth) - tp


def vision_scores(
    traces: Sequence[ExecutionTrace], annotations: Mapping
) -> tuple[float | None, float | None]:
    """(LCC accuracy %, detection F1 %) pooled over the given traces.

    FN counts annotation boxes unmatched within called scenes; scenes the
    agent never inspected are already charged by MSPE.
    """
    lcc_tasks = 0
    lcc_correct = 0
    tp = fp = fn = 0
    any_detection = False
    for trace in traces:
        labels: list[bool] = []
        for call in trace.executed_steps:
            if call.result_status != "ok":
                continue
            if call.tool == "classify_landcover":
                payload = json.loads(call.result_payload)
                truth = annotations[payload["scene"]].landcover
                labels.append(payload["landcover"] == truth)
            elif call.tool == "detect_objects":
                any_detection = True
                payload = json.loads(call.result_payload)
                truth_boxes = [
                    box
                    for cls, box in annotations[payload["scene"]].objects
                    if cls == payload["class"]
                ]
                t, p, n = match_boxes(payload["boxes"], truth_boxes)
                tp, fp, fn = tp + t, fp + p, fn + n
        if labels:
            lcc_tasks += 1
            lcc_correct += int(all(labels))
    lcc = 100.0 * lcc_correct / lcc_tasks if lcc_tasks else None
    if any_detection:
        denominator = 2 * tp + fp + fn
        f1 = 100.0 * 2 * tp / denominator if denominator else 0.0
    else:
        f1 = None
    return lcc, f1


# --- Aggregation and reports ---------------------------------------------------


def aggregate(
    scores: Sequence[TaskScore],
    strategy: str,
    ts: bool,
    wm: bool,
    vision: tuple[float | None, float | None] = (None, None),
) -> BenchmarkReport:
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    epsilon: dict[str, float | None] = {}
    for metric in RASTER_METRICS:
        values = [s.epsilon_by_metric[metric] for s in scores if metric in s.epsilon_by_metric]
        epsilon[metric] = sum(values) / len(values) if values else None
    terminal_counts: dict[str, int] = {}
    for score in scores:
        terminal_counts[score.terminal] = terminal_counts.get(score.terminal, 0) + 1
    return BenchmarkReport(
        strategy=strategy,
        ts=ts,
        wm=wm,
        tasks=len(scores),
        correctness_rate=100.0 * sum(s.correctness for s in scores) / len(scores),
        avg_tokens_k=sum(s.tokens for s in scores) / len(scores) / 1000.0,
        epsilon_by_metric=epsilon,
        lcc_accuracy=vision[0],
        det_f1=vision[1],
        terminal_counts=terminal_counts,
    )


def _fmt(value: float | None) -> str:
    return "--" if value is None else f"{value:.2f}"


def report_row(report: BenchmarkReport) -> list[str]:
    row = [
        report.strategy,
        "yes" if report.ts else "no",
        "yes" if report.wm else "no",
        str(report.tasks),
        f"{report.correctness_rate:.2f}",
        f"{report.avg_tokens_k:.2f}",
    ]
    row.extend(_fmt(report.epsilon_by_metric.get(m)) for m in RASTER_METRICS)
    row.append(_fmt(report.lcc_accuracy))
    row.append(_fmt(report.det_f1))
    row.append(str(report.terminal_counts.get("completed", 0)))
    row.append(str(report.terminal_counts.get("context_overflow", 0)))
    return row


def render_report(reports: Sequence[BenchmarkReport]) -> tuple[str, str]:
    """(aligned markdown table, CSV text) with a fixed column order."""
    rows = [list(CSV_COLUMNS)] + [report_row(r) for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(CSV_COLUMNS))]
    lines = []
    for index, row in enumerate(rows):
        lines.append(" | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        if index == 0:
            lines.append("-|-".join("-" * w for w in widths))
    table = "\n".join(lines) + "\n"

    buffer = io.StringIO()
    buffer.write(",".join(CSV_COLUMNS) + "\n")
    for report in reports:
        buffer.write(",".join(report_row(report)) + "\n")
    return table, buffer.getvalue()


def parse_report_csv(text: str) -> list[dict]:
    import csv

    return list(csv.DictReader(io.StringIO(text)))


def write_reports(reports: Sequence[BenchmarkReport], out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table, csv_text = render_report(reports)
    md_path = out_dir / "report.md"
    csv_path = out_dir / "report.csv"
    md_path.write_text(table, encoding="utf-8")
    csv_path.write_text(csv_text, encoding="utf-8")
    return md_path, csv_path
