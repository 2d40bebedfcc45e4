"""Orchestration strategies over identical agents, tools and sandbox.

single_agent      one generalist holding every registered tool (monolith
                  baseline; fails by context overflow as toolsets grow)
composition_only  plan once, execute once, no recovery
ledger_loop       a planner model call before every agent step
hybrid            plan, execute, check completion, revise within a bound

Schedules use the program-like surface "schedule = [Agent(prompt), ...]"
parsed with a tolerant grammar; revision preserves the completed prefix
and inserts the dependency-hinted agent before the failing step.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .agents import (
    AgentSpec,
    AgentResult,
    build_agent_spec,
    context_digest,
    load_prompt_template,
    run_subtask,
)
from .backend import BackendConfig, ChatMessage
from .core import (
    ExecutionTrace,
    RunUsage,
    Schedule,
    SubTask,
    TaskPrompt,
    TokenUsage,
    ToolCall,
)
from .errors import ContextOverflow, EmptyStore, MaxRevisions, UnparseableSchedule
from .registry import ToolRegistry, format_guidance
from .sandbox import PRODUCT_DATES, Sandbox, SandboxSession
from .toolkit import AGENT_ROLES, SUPPORT_TOOLS, load_phrase

EventHook = Callable[[str, dict], None]


@dataclass(frozen=True)
class StrategyConfig:
    strategy: str = "hybrid"
    max_revisions: int = 3
    max_ledger_rounds: int = 20
    wm_enabled: bool = True
    ts_enabled: bool = True
    max_tool_rounds: int = 8

    def __post_init__(self):
        if self.strategy not in ("single_agent", "composition_only", "ledger_loop", "hybrid"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if min(self.max_revisions, self.max_ledger_rounds, self.max_tool_rounds) < 1:
            raise ValueError("strategy bounds must be positive")


@dataclass(frozen=True)
class CompletionVerdict:
    complete: bool
    missing: str = ""
    revision_directive: str | None = None

    def __post_init__(self):
        if not self.complete and not self.missing:
            raise ValueError("incomplete verdict requires a missing rationale")


# --- Schedule text parsing ---------------------------------------------------

_ITEM_RE = re.compile(r'^\s*"?([A-Za-z_]\w*)"?\s*\(')


def parse_schedule_text(text: str) -> list[tuple[str, str]]:
    """Parse 'schedule = [Agent(prompt), ...]' tolerantly.

    Whitespace, newlines and optional quoting are accepted; prompts may
    contain balanced parentheses and commas.
    """
    match = re.search(r"schedule\s*=\s*\[", text)
    if not match:
        raise UnparseableSchedule("no 'schedule = [' marker found")
    body_start = match.end()
    depth_sq, depth_par = 1, 0
    end = None
    for i in range(body_start, len(text)):
        ch = text[i]
        if ch == "[":
            depth_sq += 1
        elif ch == "]":
            depth_sq -= 1
            if depth_sq == 0:
                end = i
                break
        elif ch == "(":
            depth_par += 1
        elif ch == ")":
            depth_par = max(0, depth_par - 1)
    if end is None:
        raise UnparseableSchedule("unterminated schedule list")
    body = text[body_start:end]

    items: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(current))
            current = []
        else:
            current.append(ch)
    if "".join(current).strip():
        items.append("".join(current))

    subtasks: list[tuple[str, str]] = []
    for item in items:
        if not item.strip():
            continue
        match = _ITEM_RE.match(item)
        closing = item.rfind(")")
        if not match or closing < match.end() - 1:
            raise UnparseableSchedule(f"cannot parse schedule item {item.strip()!r}")
        agent = match.group(1)
        prompt = item[match.end() : closing].strip().strip("\"'").strip()
        if not prompt:
            raise UnparseableSchedule(f"empty subprompt for agent {agent}")
        subtasks.append((agent, prompt))
    if not subtasks:
        raise UnparseableSchedule("schedule list is empty")
    return subtasks


def render_schedule_text(subtasks: Sequence[tuple[str, str]]) -> str:
    inner = ", ".join(f"{agent}({prompt})" for agent, prompt in subtasks)
    return f"schedule = [{inner}]"


def roster_text(registry: ToolRegistry) -> str:
    lines = []
    for agent in registry.agents():
        role = AGENT_ROLES.get(agent, "specialist tools")
        lines.append(f"- {agent}: {role} ({len(registry.tools_for(agent))} tools)")
    return "\n".join(lines)


# --- Planning ----------------------------------------------------------------

_FORMAT_REMINDER = (
    "Your reply could not be parsed. Reply with exactly one line of the form: "
    "schedule = [AgentName(subtask prompt), AgentName(subtask prompt)]"
)

# Planner user turns open with this marker so planning conversations are
# textually distinct from the raw task text a monolithic agent receives.
PLANNER_PREFIX = "Request: "


def plan(
    task: TaskPrompt,
    wm_hits,
    backend,
    config: BackendConfig,
    registry: ToolRegistry,
    prompt_dir: str | None = None,
    revision: int = 0,
) -> tuple[Schedule, list[TokenUsage]]:
    """One (or, after a format reminder, two) planner calls -> Schedule."""
    guidance = format_guidance([], wm_hits) if wm_hits else ""
    template = load_prompt_template("orchestrator_system", prompt_dir)
    system = template.format(roster=roster_text(registry), guidance=guidance).strip()
    request = f"{PLANNER_PREFIX}{task.text}\nProduce the schedule now."
    messages = [
        ChatMessage(role="system", content=system),
        ChatMessage(role="user", content=request),
    ]
    usages: list[TokenUsage] = []
    known = set(registry.agents())
    last_error = "planner produced no parseable schedule"
    for attempt in range(2):
        reply, usage = backend.complete(messages, [], config)
        usages.append(usage)
        try:
            parsed = parse_schedule_text(reply.content)
            unknown = [agent for agent, _ in parsed if agent not in known]
            if unknown:
                raise UnparseableSchedule(f"schedule names unknown agents {unknown}")
            subtasks = tuple(SubTask(agent, prompt) for agent, prompt in parsed)
            return Schedule(subtasks=subtasks, revision=revision), usages
        except UnparseableSchedule as error:
            last_error = str(error)
            if attempt == 0:
                # the reminder restates the request so the retry still
                # carries the full context in its latest user turn
                messages = messages + [
                    reply,
                    ChatMessage(role="user", content=f"{_FORMAT_REMINDER}\n{request}"),
                ]
    error = UnparseableSchedule(last_error)
    error.usages = usages
    raise error


# --- Execution ---------------------------------------------------------------


def execute_schedule(
    schedule: Schedule,
    task: TaskPrompt,
    agents: dict[str, AgentSpec],
    backend,
    config: BackendConfig,
    registry: ToolRegistry,
    session: SandboxSession,
    ts_enabled: bool,
    statuses: list[AgentResult | None],
    start_index: int = 0,
    on_event: EventHook | None = None,
) -> list[TokenUsage]:
    """Run subtasks in order from start_index; halt early on failure.

    statuses is updated in place, aligned 1:1 with schedule.subtasks.
    """
    usages: list[TokenUsage] = []
    summaries = [
        f"{schedule.subtasks[i].agent}={statuses[i].status}"
        for i in range(start_index)
        if statuses[i] is not None
    ]
    for index in range(start_index, len(schedule.subtasks)):
        subtask = schedule.subtasks[index]
        spec = agents[subtask.agent]
        if on_event:
            on_event("agent_start", {"agent": subtask.agent, "subprompt": subtask.subprompt})
        result = run_subtask(
            spec,
            subtask.subprompt,
            context_digest(summaries, session),
            backend,
            config,
            registry,
            session,
            ts_enabled=ts_enabled,
            on_event=on_event,
        )
        statuses[index] = result
        usages.extend(result.token_usage)
        summaries.append(f"{subtask.agent}={result.status}")
        if on_event:
            on_event("agent_done", {"agent": subtask.agent, "status": result.status})
        if result.status != "done":
            break
    return usages


def requests_plot(text: str) -> bool:
    lowered = text.lower()
    return "plot" in lowered or "map" in lowered


def check_completion(
    task: TaskPrompt,
    schedule: Schedule,
    statuses: Sequence[AgentResult | None],
    backend,
    config: BackendConfig,
) -> tuple[CompletionVerdict, list[TokenUsage]]:
    """Judge completion; deterministic rule for scripted runs, one model
    call for live runs (unparseable judgment counts as incomplete)."""
    if config.kind == "scripted":
        return _rule_verdict(task, schedule, statuses), []

    lines = []
    for subtask, result in zip(schedule.subtasks, statuses):
        state = result.status if result is not None else "not run"
        summary = result.summary if result is not None else ""
        lines.append(f"{subtask.agent}: {state} -- {summary}")
    messages = [
        ChatMessage(
            role="system",
            content=(
                "You are a geospatial orchestrator verifying task completion. "
                "Reply 'COMPLETE' or 'INCOMPLETE: <what is missing>'."
            ),
        ),
        ChatMessage(role="user", content=f"Task: {task.text}\n" + "\n".join(lines)),
    ]
    reply, usage = backend.complete(messages, [], config)
    text = reply.content.strip()
    if text.upper().startswith("COMPLETE"):
        return CompletionVerdict(complete=True), [usage]
    if text.upper().startswith("INCOMPLETE"):
        missing = text.partition(":")[2].strip() or "unspecified"
        return CompletionVerdict(complete=False, missing=missing), [usage]
    return CompletionVerdict(complete=False, missing="unverifiable"), [usage]


def _rule_verdict(
    task: TaskPrompt, schedule: Schedule, statuses: Sequence[AgentResult | None]
) -> CompletionVerdict:
    for subtask, result in zip(schedule.subtasks, statuses):
        if result is None:
            return CompletionVerdict(False, missing=f"{subtask.agent} step did not run")
        if result.status == "needs_dependency":
            hint = result.dependency_hint
            return CompletionVerdict(
                False,
                missing=f"{subtask.agent} blocked: {hint.reason}",
                revision_directive=hint.agent,
            )
        if result.status != "done":
            return CompletionVerdict(False, missing=f"{subtask.agent} failed: {result.summary}")
    if requests_plot(task.text) and not any(s.agent == "Map" for s in schedule.subtasks):
        return CompletionVerdict(False, missing="plotting requested but no Map step ran")
    return CompletionVerdict(complete=True)


def _default_date_range(product: str | None) -> tuple[str, str]:
    dates = PRODUCT_DATES.get(product or "", ("2024-01", "2024-12"))
    return dates[0], dates[-1]


# Product mentions in task prose, scanned in order; used when a failing
# tool could not name the product it was missing (filter/stats/map accept
# any product, so their MissingProduct hints carry none).
_PRODUCT_ALIASES = (
    ("ndvi", "ndvi"),
    ("ref_b2", "ref_b2"),
    ("ref b2", "ref_b2"),
    ("reflectance", "ref_b2"),
    ("lst", "lst"),
    ("heatwave", "lst"),
    ("aod", "aod550"),
    ("aerosol", "aod550"),
    ("pop", "population"),
    ("built", "built_s"),
    ("canopy", "canopy"),
    ("tree loss", "treeloss"),
    ("treeloss", "treeloss"),
)


def infer_product(text: str) -> str | None:
    lowered = text.lower()
    for alias, product in _PRODUCT_ALIASES:
        if alias in lowered:
            return product
    return None


def hint_subprompt(hint, task: TaskPrompt) -> str:
    if hint.kind == "unknown_region":
        return "List the available regions"
    product = hint.product or infer_product(task.text)
    if product:
        date_range = task.date_range or _default_date_range(product)
        region = task.region or "all"
        return load_phrase(product, region, date_range)
    return "List the available data products"


def revise(
    schedule: Schedule,
    verdict: CompletionVerdict,
    task: TaskPrompt,
    statuses: Sequence[AgentResult | None],
    max_revisions: int,
) -> tuple[Schedule, int]:
    """New schedule with revision+1; completed prefix preserved.

    Returns (schedule, resume_index).  With a dependency hint the hinted
    agent is inserted before the failing step; otherwise the remaining
    steps are simply retried.
    """
    if verdict.complete:
        raise ValueError("revise called with a complete verdict")
    if schedule.revision >= max_revisions:
        raise MaxRevisions(f"revision limit {max_revisions} reached")

    failing = len(statuses)
    for i, result in enumerate(statuses):
        if result is None or result.status != "done":
            failing = i
            break

    subtasks = list(schedule.subtasks)
    hint = None
    if failing < len(statuses) and statuses[failing] is not None:
        hint = statuses[failing].dependency_hint
    if hint is not None:
        subtasks.insert(failing, SubTask(hint.agent, hint_subprompt(hint, task)))
    return Schedule(tuple(subtasks), revision=schedule.revision + 1), failing


# --- Full task runs ----------------------------------------------------------


def compose_final_answer(
    statuses: Sequence[AgentResult | None], verdict: CompletionVerdict | None
) -> str:
    done = [r for r in statuses if r is not None and r.status == "done"]
    findings: list[str] = []
    for result in statuses:
        if result is None:
            continue
        for call in result.tool_calls:
            if call.result_status == "ok" and call.tool not in SUPPORT_TOOLS:
                payload = call.result_payload
                findings.append(f"{call.tool}: {payload[:200]}")
    parts = []
    if verdict is not None and not verdict.complete:
        parts.append(f"Incomplete: {verdict.missing}")
    elif done:
        parts.append(done[-1].summary)
    if findings:
        parts.append("Findings: " + " | ".join(findings[-3:]))
    return " ".join(parts) if parts else "No work performed."


def _wm_hits(registry: ToolRegistry, task: TaskPrompt, enabled: bool):
    if not enabled:
        return []
    try:
        return registry.wm_retrieve(task.text, k=2)
    except EmptyStore:
        return []


def run_task(
    task: TaskPrompt,
    strategy: StrategyConfig,
    backend,
    config: BackendConfig,
    registry: ToolRegistry,
    sandbox: Sandbox,
    prompt_dir: str | None = None,
    on_event: EventHook | None = None,
) -> tuple[ExecutionTrace, SandboxSession]:
    """Run one task under one strategy; all terminal states are encoded in
    the trace, never raised past this boundary."""
    session = SandboxSession(sandbox)
    if strategy.strategy == "single_agent":
        trace = _run_single_agent(task, strategy, backend, config, registry, session, prompt_dir, on_event)
    elif strategy.strategy == "composition_only":
        trace = _run_composition(task, strategy, backend, config, registry, session, prompt_dir, on_event)
    elif strategy.strategy == "ledger_loop":
        trace = _run_ledger(task, strategy, backend, config, registry, session, prompt_dir, on_event)
    else:
        trace = _run_hybrid(task, strategy, backend, config, registry, session, prompt_dir, on_event)
    if on_event:
        on_event("final", {"terminal": trace.terminal, "answer": trace.final_answer})
    return trace, session


def _emit_schedule(on_event: EventHook | None, schedule: Schedule) -> None:
    if on_event:
        on_event("schedule", schedule.to_dict())


def _emit_verdict(on_event: EventHook | None, verdict: CompletionVerdict) -> None:
    if on_event:
        on_event(
            "verdict",
            {"complete": verdict.complete, "missing": verdict.missing},
        )


def _collect_calls(statuses: Sequence[AgentResult | None]) -> list[ToolCall]:
    calls: list[ToolCall] = []
    for result in statuses:
        if result is not None:
            calls.extend(result.tool_calls)
    return calls


def _run_single_agent(
    task, strategy, backend, config, registry, session, prompt_dir, on_event
) -> ExecutionTrace:
    template = load_prompt_template("single_agent_system", prompt_dir)
    # WM guidance goes into the system prompt, never the user turn: the
    # user turn must stay the raw task text for scripted playback
    if strategy.wm_enabled:
        hits = _wm_hits(registry, task, True)
        if hits:
            template = template + "\n" + format_guidance([], hits)
    spec = AgentSpec(
        name="Generalist",
        system_prompt=template,
        toolkit=tuple(registry.all_tools()),
        max_tool_rounds=strategy.max_tool_rounds,
        namespace_free=True,
    )
    if on_event:
        on_event("agent_start", {"agent": "Generalist", "subprompt": task.text})
    try:
        result = run_subtask(
            spec, task.text, "", backend, config, registry, session,
            ts_enabled=strategy.ts_enabled, on_event=on_event,
        )
    except ContextOverflow as overflow:
        return ExecutionTrace(
            task_id=task.id,
            strategy="single_agent",
            executed_steps=(),
            schedules=(),
            token_usage=RunUsage(),
            final_answer=str(overflow),
            terminal="context_overflow",
        )
    terminal = "completed" if result.status == "done" else "budget_exhausted"
    return ExecutionTrace(
        task_id=task.id,
        strategy="single_agent",
        executed_steps=tuple(result.tool_calls),
        schedules=(),
        token_usage=RunUsage(tuple(result.token_usage)),
        final_answer=compose_final_answer([result], None),
        terminal=terminal,
    )


def _build_agents(registry: ToolRegistry, strategy: StrategyConfig, prompt_dir) -> dict[str, AgentSpec]:
    return {
        name: build_agent_spec(name, registry, strategy.max_tool_rounds, prompt_dir)
        for name in registry.agents()
    }


def _plan_or_trace(task, strategy, backend, config, registry, prompt_dir, usages, revision=0):
    """Returns (schedule, None) or (None, failure ExecutionTrace)."""
    wm = _wm_hits(registry, task, strategy.wm_enabled)
    try:
        schedule, plan_usages = plan(task, wm, backend, config, registry, prompt_dir, revision)
        usages.extend(plan_usages)
        return schedule, None
    except UnparseableSchedule as error:
        usages.extend(getattr(error, "usages", []))
        trace = ExecutionTrace(
            task_id=task.id,
            strategy=strategy.strategy,
            executed_steps=(),
            schedules=(Schedule((SubTask("Database", "unplanned"),), 0),),
            token_usage=RunUsage(tuple(usages)),
            final_answer=f"planning failed: {error}",
            terminal="budget_exhausted",
        )
        return None, trace
    except ContextOverflow as overflow:
        trace = ExecutionTrace(
            task_id=task.id,
            strategy=strategy.strategy,
            executed_steps=(),
            schedules=(Schedule((SubTask("Database", "unplanned"),), 0),),
            token_usage=RunUsage(tuple(usages)),
            final_answer=str(overflow),
            terminal="context_overflow",
        )
        return None, trace


def _run_composition(
    task, strategy, backend, config, registry, session, prompt_dir, on_event
) -> ExecutionTrace:
    usages: list[TokenUsage] = []
    schedule, failure = _plan_or_trace(task, strategy, backend, config, registry, prompt_dir, usages)
    if failure is not None:
        return failure
    _emit_schedule(on_event, schedule)
    agents = _build_agents(registry, strategy, prompt_dir)
    statuses: list[AgentResult | None] = [None] * len(schedule.subtasks)
    terminal = "completed"
    verdict = None
    try:
        usages.extend(
            execute_schedule(
                schedule, task, agents, backend, config, registry, session,
                strategy.ts_enabled, statuses, on_event=on_event,
            )
        )
        verdict, check_usages = check_completion(task, schedule, statuses, backend, config)
        usages.extend(check_usages)
        _emit_verdict(on_event, verdict)
        terminal = "completed" if verdict.complete else "max_revisions"
    except ContextOverflow:
        terminal = "context_overflow"
    return ExecutionTrace(
        task_id=task.id,
        strategy="composition_only",
        executed_steps=tuple(_collect_calls(statuses)),
        schedules=(schedule,),
        token_usage=RunUsage(tuple(usages)),
        final_answer=compose_final_answer(statuses, verdict),
        terminal=terminal,
    )


def _run_hybrid(
    task, strategy, backend, config, registry, session, prompt_dir, on_event
) -> ExecutionTrace:
    usages: list[TokenUsage] = []
    schedule, failure = _plan_or_trace(task, strategy, backend, config, registry, prompt_dir, usages)
    if failure is not None:
        return failure
    _emit_schedule(on_event, schedule)
    agents = _build_agents(registry, strategy, prompt_dir)
    schedules = [schedule]
    statuses: list[AgentResult | None] = [None] * len(schedule.subtasks)
    executed: list[ToolCall] = []
    resume = 0
    terminal = "completed"
    verdict = None
    try:
        while True:
            # everything from resume onward was reset to None, so any
            # non-None entry in that range was produced by this pass
            usages.extend(
                execute_schedule(
                    schedule, task, agents, backend, config, registry, session,
                    strategy.ts_enabled, statuses, start_index=resume, on_event=on_event,
                )
            )
            for i in range(resume, len(statuses)):
                if statuses[i] is not None:
                    executed.extend(statuses[i].tool_calls)
            verdict, check_usages = check_completion(task, schedule, statuses, backend, config)
            usages.extend(check_usages)
            _emit_verdict(on_event, verdict)
            if verdict.complete:
                terminal = "completed"
                break
            try:
                schedule, resume = revise(
                    schedule, verdict, task, statuses, strategy.max_revisions
                )
            except MaxRevisions:
                terminal = "max_revisions"
                break
            # completed prefix survives the revision untouched (insertion
            # happens at or after the resume point); the rest re-runs
            statuses = list(statuses[:resume]) + [None] * (len(schedule.subtasks) - resume)
            schedules.append(schedule)
            _emit_schedule(on_event, schedule)
    except ContextOverflow:
        terminal = "context_overflow"
    return ExecutionTrace(
        task_id=task.id,
        strategy="hybrid",
        executed_steps=tuple(executed),
        schedules=tuple(schedules),
        token_usage=RunUsage(tuple(usages)),
        final_answer=compose_final_answer(statuses, verdict),
        terminal=terminal,
    )


def _run_ledger(
    task, strategy, backend, config, registry, session, prompt_dir, on_event
) -> ExecutionTrace:
    usages: list[TokenUsage] = []
    agents = _build_agents(registry, strategy, prompt_dir)
    effective: list[SubTask] | None = None
    statuses: list[AgentResult | None] = []
    schedules: list[Schedule] = []
    executed: list[ToolCall] = []
    terminal = "budget_exhausted"
    verdict = None
    try:
        for _round in range(strategy.max_ledger_rounds):
            planned, failure = _plan_or_trace(
                task, strategy, backend, config, registry, prompt_dir, usages,
                revision=len(schedules),
            )
            if failure is not None:
                if not schedules:
                    return failure
                terminal = "budget_exhausted"
                break
            if effective is None:
                effective = list(planned.subtasks)
                statuses = [None] * len(effective)
            schedule = Schedule(tuple(effective), revision=len(schedules))
            schedules.append(schedule)
            _emit_schedule(on_event, schedule)

            next_index = None
            for i, result in enumerate(statuses):
                if result is None or result.status != "done":
                    next_index = i
                    break
            if next_index is None:
                verdict, check_usages = check_completion(task, schedule, statuses, backend, config)
                usages.extend(check_usages)
                _emit_verdict(on_event, verdict)
                terminal = "completed" if verdict.complete else "budget_exhausted"
                break

            # exactly one agent step per planner round: that per-step
            # re-planning is what makes the ledger baseline expensive
            subtask = schedule.subtasks[next_index]
            spec = agents[subtask.agent]
            summaries = [
                f"{schedule.subtasks[i].agent}={statuses[i].status}"
                for i in range(next_index)
                if statuses[i] is not None
            ]
            if on_event:
                on_event("agent_start", {"agent": subtask.agent, "subprompt": subtask.subprompt})
            result = run_subtask(
                spec, subtask.subprompt, context_digest(summaries, session),
                backend, config, registry, session,
                ts_enabled=strategy.ts_enabled, on_event=on_event,
            )
            statuses[next_index] = result
            usages.extend(result.token_usage)
            executed.extend(result.tool_calls)
            if on_event:
                on_event("agent_done", {"agent": subtask.agent, "status": result.status})
            failing = None
            for i, result in enumerate(statuses):
                if result is not None and result.status == "needs_dependency":
                    failing = i
                    break
            if failing is not None and statuses[failing].dependency_hint is not None:
                hint = statuses[failing].dependency_hint
                effective.insert(failing, SubTask(hint.agent, hint_subprompt(hint, task)))
                statuses.insert(failing, None)
                statuses[failing + 1] = None
    except ContextOverflow:
        terminal = "context_overflow"
    if not schedules:
        schedules = [Schedule((SubTask("Database", "unplanned"),), 0)]
    return ExecutionTrace(
        task_id=task.id,
        strategy="ledger_loop",
        executed_steps=tuple(executed),
        schedules=tuple(schedules),
        token_usage=RunUsage(tuple(usages)),
        final_answer=compose_final_answer(statuses, verdict),
        terminal=terminal,
    )
