"""Shared domain types: tasks, gold solutions, tool calls, schedules, traces.

Everything here is an immutable value object with a JSON round-trip; the
only behavior is construction-time validation and dataset-level checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping, Sequence

DOMAINS = (
    "agriculture",
    "climate",
    "urban",
    "forestry",
    "vision",
    "database",
    "dataops",
    "map",
)

# Agent owning each task domain.  The three support agents (Database,
# DataOps, Map) also have task domains of their own.
DOMAIN_AGENTS = {
    "agriculture": "Agriculture",
    "climate": "Climate",
    "urban": "Urban",
    "forestry": "Forest",
    "vision": "Vision",
    "database": "Database",
    "dataops": "DataOps",
    "map": "Map",
}

AGENT_NAMES = tuple(DOMAIN_AGENTS[d] for d in DOMAINS)

PRODUCTS = (
    "ndvi",
    "ref_b2",
    "lst",
    "aod550",
    "built_s",
    "population",
    "canopy",
    "treeloss",
    "detection",
    "lcc",
)

STRATEGIES = ("single_agent", "composition_only", "ledger_loop", "hybrid")

TERMINALS = ("completed", "budget_exhausted", "max_revisions", "context_overflow")

RESULT_STATUSES = ("ok", "error")


class CoreValidationError(ValueError):
    """A core type was constructed with invalid field values."""


@dataclass(frozen=True, order=True)
class DataPointKey:
    """One addressable cell value: (product, grid cell, date).

    Row 0 is the north edge.  Ordering is the natural tuple order, which
    makes set diffs and serialized listings deterministic.
    """

    product: str
    cell: tuple[int, int]
    date: str

    def __post_init__(self):
        if self.product not in PRODUCTS:
            raise CoreValidationError(f"unknown product {self.product!r}")
        object.__setattr__(self, "cell", (int(self.cell[0]), int(self.cell[1])))

    def compact(self) -> str:
        return f"{self.product}:{self.cell[0]}:{self.cell[1]}:{self.date}"

    @classmethod
    def from_compact(cls, text: str) -> "DataPointKey":
        product, row, col, date = text.split(":")
        return cls(product=product, cell=(int(row), int(col)), date=date)


def encode_keyset(keys: Iterable[DataPointKey]) -> list[str]:
    """Sorted compact encoding; sorted so serialized sets are stable."""
    return [k.compact() for k in sorted(keys)]


def decode_keyset(items: Iterable[str]) -> set[DataPointKey]:
    return {DataPointKey.from_compact(s) for s in items}


@dataclass(frozen=True)
class TaskPrompt:
    """A single natural-language benchmark task."""

    id: str
    domain: str
    text: str
    region: str
    date_range: tuple[str, str] | None = None

    def __post_init__(self):
        if not self.id:
            raise CoreValidationError("task id must be nonempty")
        if not self.text:
            raise CoreValidationError(f"task {self.id}: text must be nonempty")
        if self.domain not in DOMAINS:
            raise CoreValidationError(f"task {self.id}: unknown domain {self.domain!r}")
        if self.date_range is not None:
            object.__setattr__(self, "date_range", (self.date_range[0], self.date_range[1]))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "text": self.text,
            "region": self.region,
            "date_range": list(self.date_range) if self.date_range else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TaskPrompt":
        dr = d.get("date_range")
        return cls(
            id=d["id"],
            domain=d["domain"],
            text=d["text"],
            region=d["region"],
            date_range=(dr[0], dr[1]) if dr else None,
        )


def normalize_args(args: Mapping[str, Any]) -> tuple[tuple[str, Any], ...]:
    """Canonical form for tool-argument comparison.

    Keys sorted; string values stripped and lowercased (region names and
    other identifiers vary in casing between model outputs and gold);
    numbers passed through for tolerant comparison downstream.
    """
    out = []
    for key in sorted(args):
        value = args[key]
        if isinstance(value, str):
            value = value.strip().lower()
        elif isinstance(value, bool):
            pass
        elif isinstance(value, (int, float)):
            value = float(value)
        out.append((key, value))
    return tuple(out)


def args_match(a: Mapping[str, Any], b: Mapping[str, Any], rel_tol: float = 1e-6) -> bool:
    """Normalized equality with relative tolerance on numeric values."""
    na, nb = normalize_args(a), normalize_args(b)
    if len(na) != len(nb):
        return False
    for (ka, va), (kb, vb) in zip(na, nb):
        if ka != kb:
            return False
        if isinstance(va, float) and isinstance(vb, float):
            if va != vb and abs(va - vb) > rel_tol * max(abs(va), abs(vb)):
                return False
        elif va != vb:
            return False
    return True


@dataclass(frozen=True)
class GoldStep:
    """One canonical tool invocation in a gold solution."""

    agent_name: str
    tool_name: str
    canonical_args: Mapping[str, Any]

    def __post_init__(self):
        object.__setattr__(self, "canonical_args", dict(self.canonical_args))

    def to_dict(self) -> dict:
        return {
            "agent_name": self.agent_name,
            "tool_name": self.tool_name,
            "canonical_args": dict(self.canonical_args),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GoldStep":
        return cls(d["agent_name"], d["tool_name"], d["canonical_args"])

    def __eq__(self, other):
        if not isinstance(other, GoldStep):
            return NotImplemented
        return (
            self.agent_name == other.agent_name
            and self.tool_name == other.tool_name
            and args_match(self.canonical_args, other.canonical_args)
        )

    def __hash__(self):
        return hash((self.agent_name, self.tool_name))


@dataclass(frozen=True)
class GoldSolution:
    """Ground truth for one task: ordered steps plus the gold datapoint set."""

    task_id: str
    steps: tuple[GoldStep, ...]
    gold_datapoints: frozenset[DataPointKey]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "gold_datapoints", frozenset(self.gold_datapoints))
        if not self.steps:
            raise CoreValidationError(f"gold {self.task_id}: steps must be nonempty")

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "steps": [s.to_dict() for s in self.steps],
            "gold_datapoints": encode_keyset(self.gold_datapoints),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "GoldSolution":
        return cls(
            task_id=d["task_id"],
            steps=tuple(GoldStep.from_dict(s) for s in d["steps"]),
            gold_datapoints=decode_keyset(d["gold_datapoints"]),
        )


@dataclass(frozen=True)
class ToolSpec:
    """A callable capability: schema metadata plus its rendered token cost.

    params entries are (name, semantic_type, required).
    """

    name: str
    agent: str
    description: str
    params: tuple[tuple[str, str, bool], ...]
    schema_token_cost: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "params", tuple((p[0], p[1], bool(p[2])) for p in self.params)
        )
        if self.schema_token_cost < 0:
            raise CoreValidationError(f"tool {self.name}: negative schema_token_cost")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "agent": self.agent,
            "description": self.description,
            "params": [list(p) for p in self.params],
            "schema_token_cost": self.schema_token_cost,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ToolSpec":
        return cls(
            name=d["name"],
            agent=d["agent"],
            description=d["description"],
            params=tuple((p[0], p[1], bool(p[2])) for p in d["params"]),
            schema_token_cost=d.get("schema_token_cost", 0),
        )


@dataclass(frozen=True)
class ToolCall:
    """One executed tool invocation with its recorded data accesses."""

    agent: str
    tool: str
    args: Mapping[str, Any]
    result_status: str
    result_payload: str
    accessed: frozenset[DataPointKey] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "args", dict(self.args))
        object.__setattr__(self, "accessed", frozenset(self.accessed))
        if self.result_status not in RESULT_STATUSES:
            raise CoreValidationError(f"bad result_status {self.result_status!r}")
        if self.result_status == "error" and not self.result_payload:
            raise CoreValidationError("error tool call must carry an error payload")

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "tool": self.tool,
            "args": dict(self.args),
            "result_status": self.result_status,
            "result_payload": self.result_payload,
            "accessed": encode_keyset(self.accessed),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ToolCall":
        return cls(
            agent=d["agent"],
            tool=d["tool"],
            args=d["args"],
            result_status=d["result_status"],
            result_payload=d["result_payload"],
            accessed=decode_keyset(d.get("accessed", [])),
        )


@dataclass(frozen=True)
class SubTask:
    """One (agent, subprompt) assignment within a schedule."""

    agent: str
    subprompt: str

    def to_dict(self) -> dict:
        return {"agent": self.agent, "subprompt": self.subprompt}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SubTask":
        return cls(d["agent"], d["subprompt"])


@dataclass(frozen=True)
class Schedule:
    """The orchestrator's program-like plan."""

    subtasks: tuple[SubTask, ...]
    revision: int = 0

    def __post_init__(self):
        object.__setattr__(self, "subtasks", tuple(self.subtasks))
        if not self.subtasks:
            raise CoreValidationError("schedule must have at least one subtask")
        if self.revision < 0:
            raise CoreValidationError("schedule revision must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "subtasks": [s.to_dict() for s in self.subtasks],
            "revision": self.revision,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Schedule":
        return cls(
            subtasks=tuple(SubTask.from_dict(s) for s in d["subtasks"]),
            revision=d["revision"],
        )


@dataclass(frozen=True)
class TokenUsage:
    """Token accounting for one backend call.

    reported_total_tokens carries the endpoint-reported figure for live
    HTTP runs when the endpoint returns one; our own accounting is always
    the authoritative value.
    """

    prompt_tokens: int
    completion_tokens: int
    total_tokens: int
    reported_total_tokens: int | None = None

    def __post_init__(self):
        if min(self.prompt_tokens, self.completion_tokens, self.total_tokens) < 0:
            raise CoreValidationError("token counts must be nonnegative")
        if self.total_tokens != self.prompt_tokens + self.completion_tokens:
            raise CoreValidationError("total_tokens must equal prompt + completion")

    def to_dict(self) -> dict:
        d = {
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
        }
        if self.reported_total_tokens is not None:
            d["reported_total_tokens"] = self.reported_total_tokens
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "TokenUsage":
        return cls(
            prompt_tokens=d["prompt_tokens"],
            completion_tokens=d["completion_tokens"],
            total_tokens=d["total_tokens"],
            reported_total_tokens=d.get("reported_total_tokens"),
        )


@dataclass(frozen=True)
class RunUsage:
    """Per-call usages plus run totals; totals are derived, never stored."""

    calls: tuple[TokenUsage, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "calls", tuple(self.calls))

    @property
    def prompt_tokens(self) -> int:
        return sum(c.prompt_tokens for c in self.calls)

    @property
    def completion_tokens(self) -> int:
        return sum(c.completion_tokens for c in self.calls)

    @property
    def total_tokens(self) -> int:
        return sum(c.total_tokens for c in self.calls)

    def extend(self, usages: Iterable[TokenUsage]) -> "RunUsage":
        return RunUsage(self.calls + tuple(usages))

    def to_dict(self) -> dict:
        return {
            "calls": [c.to_dict() for c in self.calls],
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "total_tokens": self.total_tokens,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunUsage":
        return cls(calls=tuple(TokenUsage.from_dict(c) for c in d["calls"]))


@dataclass(frozen=True)
class ExecutionTrace:
    """Full record of one task run."""

    task_id: str
    strategy: str
    executed_steps: tuple[ToolCall, ...]
    schedules: tuple[Schedule, ...]
    token_usage: RunUsage
    final_answer: str
    terminal: str

    def __post_init__(self):
        object.__setattr__(self, "executed_steps", tuple(self.executed_steps))
        object.__setattr__(self, "schedules", tuple(self.schedules))
        if self.strategy not in STRATEGIES:
            raise CoreValidationError(f"unknown strategy {self.strategy!r}")
        if self.terminal not in TERMINALS:
            raise CoreValidationError(f"unknown terminal {self.terminal!r}")
        if self.strategy != "single_agent" and not self.schedules:
            raise CoreValidationError(
                f"trace {self.task_id}: schedules required for {self.strategy}"
            )
        revisions = [s.revision for s in self.schedules]
        if revisions != list(range(len(revisions))):
            raise CoreValidationError(
                f"trace {self.task_id}: schedule revisions {revisions} are not 0..n"
            )

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "strategy": self.strategy,
            "executed_steps": [c.to_dict() for c in self.executed_steps],
            "schedules": [s.to_dict() for s in self.schedules],
            "token_usage": self.token_usage.to_dict(),
            "final_answer": self.final_answer,
            "terminal": self.terminal,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ExecutionTrace":
        return cls(
            task_id=d["task_id"],
            strategy=d["strategy"],
            executed_steps=tuple(ToolCall.from_dict(c) for c in d["executed_steps"]),
            schedules=tuple(Schedule.from_dict(s) for s in d["schedules"]),
            token_usage=RunUsage.from_dict(d["token_usage"]),
            final_answer=d["final_answer"],
            terminal=d["terminal"],
        )

    def accessed_datapoints(self) -> set[DataPointKey]:
        out: set[DataPointKey] = set()
        for call in self.executed_steps:
            out |= call.accessed
        return out


# --- JSONL / JSON file helpers -------------------------------------------


def write_jsonl(path: str | Path, records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_tasks(path: str | Path) -> list[TaskPrompt]:
    return [TaskPrompt.from_dict(d) for d in read_jsonl(path)]


def load_golds(path: str | Path) -> list[GoldSolution]:
    return [GoldSolution.from_dict(d) for d in read_jsonl(path)]


def dump_trace(trace: ExecutionTrace, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(trace.to_dict(), ensure_ascii=False, sort_keys=True, indent=1),
        encoding="utf-8",
    )


def load_trace(path: str | Path) -> ExecutionTrace:
    return ExecutionTrace.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# --- Dataset validation ----------------------------------------------------


def validate_dataset(
    tasks: Sequence[TaskPrompt],
    golds: Sequence[GoldSolution],
    registry,
    bounds: Mapping[str, tuple[int, int, Sequence[str]]] | None = None,
) -> list[str]:
    """Cross-check a (tasks, golds) pair against a tool registry.

    registry only needs a has_tool(agent, tool) method.  bounds maps
    product -> (height, width, covered dates) and enables the datapoint
    bounds check when provided.  Returns human-readable error strings;
    empty list means the dataset is well formed.
    """
    errors: list[str] = []
    seen_ids: set[str] = set()
    for task in tasks:
        if task.id in seen_ids:
            errors.append(f"duplicate task id {task.id}")
        seen_ids.add(task.id)

    golds_by_task: dict[str, list[GoldSolution]] = {}
    for gold in golds:
        golds_by_task.setdefault(gold.task_id, []).append(gold)

    for task in tasks:
        matching = golds_by_task.get(task.id, [])
        if len(matching) != 1:
            errors.append(f"task {task.id}: expected exactly one gold, found {len(matching)}")
            continue
        gold = matching[0]
        loads = 0
        for step in gold.steps:
            if not registry.has_tool(step.agent_name, step.tool_name):
                errors.append(
                    f"task {task.id}: gold step references unknown tool "
                    f"{step.agent_name}.{step.tool_name}"
                )
            if step.tool_name == "load_product":
                loads += 1
        if loads and not gold.gold_datapoints:
            errors.append(f"task {task.id}: load step present but gold datapoint set empty")
        if bounds is not None:
            for key in gold.gold_datapoints:
                if key.product not in bounds:
                    errors.append(f"task {task.id}: datapoint product {key.product} unknown")
                    continue
                height, width, dates = bounds[key.product]
                row, col = key.cell
                if not (0 <= row < height and 0 <= col < width):
                    errors.append(
                        f"task {task.id}: datapoint cell {key.cell} out of bounds "
                        f"for {key.product} ({height}x{width})"
                    )
                if key.date not in dates:
                    errors.append(
                        f"task {task.id}: datapoint date {key.date} outside "
                        f"{key.product} coverage"
                    )

    known_tasks = {t.id for t in tasks}
    for gold in golds:
        if gold.task_id not in known_tasks:
            errors.append(f"gold references unknown task {gold.task_id}")
    return errors
