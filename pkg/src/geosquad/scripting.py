"""Compile gold solutions into scripted-backend behavior tables.

Planner rules key on "Request: <task text>"; agent rules key on the
canonical subtask phrase suffixed with the task id (the scripted planner
tags each subtask so two tasks sharing a phrase can still diverge under
perturbation).  Bare single-load rules are added for every gold load step
so dependency-recovery insertions find a matching behavior.

Modes:
  faithful      replies replay the gold solution exactly
  drop_one      exactly one gold step per task is omitted from the agent
                replies (never a load that later steps depend on)
  missing_load  the planner omits a leading pure-load Database subtask, so
                the first dependent step fails with MissingProduct until
                the orchestrator recovers
"""

from __future__ import annotations

import random
from typing import Mapping, Sequence

from .backend import ScriptedBehavior, ScriptReply, ScriptRule
from .core import GoldSolution, GoldStep, TaskPrompt
from .orchestrator import PLANNER_PREFIX, render_schedule_text
from .taskgen import group_steps_by_agent
from .toolkit import LOAD_TOOLS, describe_call, subtask_phrase

MODES = ("faithful", "drop_one", "missing_load")


def droppable_index(steps: Sequence[GoldStep], task_id: str, seed: int) -> int:
    """Pick one step whose omission leaves the rest executable.

    Loads feed later handle lookups, so they are only dropped when the
    gold has nothing else (single-step catalog/load tasks).
    """
    eligible = [i for i, s in enumerate(steps) if s.tool_name not in LOAD_TOOLS]
    if not eligible:
        eligible = [len(steps) - 1]
    rng = random.Random(f"drop:{seed}:{task_id}")
    return rng.choice(eligible)


def eligible_for_missing_load(task: TaskPrompt, gold: GoldSolution) -> bool:
    """True when dropping the leading load subtask is recoverable.

    Recovery re-renders the load from (inferred product, task region, task
    dates), so the gold loads must target the task's own region; tasks
    that load the full grid and filter later cannot be re-derived.
    """
    groups = group_steps_by_agent(gold.steps)
    if len(groups) < 2:
        return False
    agent, first = groups[0]
    if agent != "Database" or not all(s.tool_name in LOAD_TOOLS for s in first):
        return False
    return all(s.canonical_args.get("region") == task.region for s in first)


def _call(step: GoldStep) -> tuple[str, dict]:
    return step.tool_name, dict(step.canonical_args)


def _agent_replies(steps: Sequence[GoldStep], summary: str) -> tuple[ScriptReply, ...]:
    replies = [ScriptReply(tool_calls=(_call(step),)) for step in steps]
    replies.append(ScriptReply(text=summary))
    return tuple(replies)


class RuleBook:
    """Pattern -> replies accumulator that rejects conflicting rebinds."""

    def __init__(self):
        self._rules: dict[str, tuple[ScriptReply, ...]] = {}

    def add(self, pattern: str, replies: Sequence[ScriptReply]) -> None:
        replies = tuple(replies)
        existing = self._rules.get(pattern)
        if existing is not None:
            if existing != replies:
                raise ValueError(f"conflicting scripted replies for pattern {pattern!r}")
            return
        self._rules[pattern] = replies

    def rules(self) -> tuple[ScriptRule, ...]:
        return tuple(ScriptRule(p, r) for p, r in self._rules.items())


def compile_behavior(
    tasks: Sequence[TaskPrompt],
    golds: Sequence[GoldSolution],
    mode: str = "faithful",
    seed: int = 0,
) -> ScriptedBehavior:
    if mode not in MODES:
        raise ValueError(f"unknown compiler mode {mode!r}")
    golds_by_id: Mapping[str, GoldSolution] = {g.task_id: g for g in golds}
    book = RuleBook()

    for task in tasks:
        gold = golds_by_id[task.id]
        steps = list(gold.steps)
        dropped = droppable_index(steps, task.id, seed) if mode == "drop_one" else None
        kept = [s for i, s in enumerate(steps) if i != dropped]

        groups = group_steps_by_agent(steps)
        planner_groups = groups
        if mode == "missing_load" and eligible_for_missing_load(task, gold):
            planner_groups = groups[1:]

        marker = f" [{task.id}]"
        planner_items = [
            (agent, subtask_phrase([(s.tool_name, s.canonical_args) for s in group]) + marker)
            for agent, group in planner_groups
        ]
        book.add(
            f"{PLANNER_PREFIX}{task.text}",
            (ScriptReply(text=render_schedule_text(planner_items)),),
        )

        kept_ids = set(map(id, kept))
        for agent, group in groups:
            pattern = subtask_phrase(
                [(s.tool_name, s.canonical_args) for s in group]
            ) + marker
            playable = [s for s in group if id(s) in kept_ids]
            book.add(pattern, _agent_replies(playable, f"{agent} subtask complete."))

        # the single-agent monolith answers the raw task text
        book.add(task.text, _agent_replies(kept, "request complete."))

        # bare single-load rules back dependency-recovery insertions
        for step in steps:
            if step.tool_name in LOAD_TOOLS:
                book.add(
                    describe_call(step.tool_name, step.canonical_args),
                    _agent_replies([step], "dataset loaded."),
                )

    book.add("List the available regions", _agent_replies(
        [GoldStep("Database", "list_regions", {})], "regions listed."
    ))
    return ScriptedBehavior(rules=book.rules())
