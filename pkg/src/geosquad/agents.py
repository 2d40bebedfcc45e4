"""Per-agent runtime: a bounded function-calling loop over one toolkit.

Dependency signaling is structured: when a tool fails with MissingProduct
or UnknownRegion the loop ends immediately with status needs_dependency
and a hint naming the agent that can unblock it, instead of trusting the
model to describe the failure in free text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Sequence

from .backend import BackendConfig, ChatMessage
from .core import TokenUsage, ToolCall, ToolSpec
from .errors import EmptyStore, ToolError
from .registry import ToolRegistry, format_guidance
from .toolkit import AGENT_ROLES

CONTEXT_DIGEST_TOKENS = 200


def load_prompt_template(name: str, prompt_dir: str | None = None) -> str:
    if prompt_dir:
        from pathlib import Path

        return (Path(prompt_dir) / f"{name}.txt").read_text(encoding="utf-8")
    return resources.files("geosquad.prompts").joinpath(f"{name}.txt").read_text(
        encoding="utf-8"
    )


@dataclass(frozen=True)
class AgentSpec:
    """One runnable agent: identity, prompt template, toolkit, loop bound."""

    name: str
    system_prompt: str
    toolkit: tuple[ToolSpec, ...]
    max_tool_rounds: int = 8
    namespace_free: bool = False

    def __post_init__(self):
        object.__setattr__(self, "toolkit", tuple(self.toolkit))
        if self.max_tool_rounds < 1:
            raise ValueError("max_tool_rounds must be positive")


@dataclass(frozen=True)
class DependencyHint:
    """Which agent can unblock a failed subtask, and why."""

    agent: str
    reason: str
    product: str | None = None
    kind: str = "missing_product"


@dataclass(frozen=True)
class AgentResult:
    status: str  # done | failed | needs_dependency
    summary: str
    dependency_hint: DependencyHint | None
    tool_calls: tuple[ToolCall, ...]
    token_usage: tuple[TokenUsage, ...]

    def __post_init__(self):
        object.__setattr__(self, "tool_calls", tuple(self.tool_calls))
        object.__setattr__(self, "token_usage", tuple(self.token_usage))
        if self.status not in ("done", "failed", "needs_dependency"):
            raise ValueError(f"bad agent status {self.status!r}")
        if self.status == "needs_dependency" and self.dependency_hint is None:
            raise ValueError("needs_dependency requires a dependency hint")


def build_agent_spec(
    name: str,
    registry: ToolRegistry,
    max_tool_rounds: int = 8,
    prompt_dir: str | None = None,
) -> AgentSpec:
    template = load_prompt_template("agent_system", prompt_dir)
    return AgentSpec(
        name=name,
        system_prompt=template,
        toolkit=tuple(registry.tools_for(name)),
        max_tool_rounds=max_tool_rounds,
    )


def build_agent_prompt(
    agent: AgentSpec, subprompt: str, ts_guidance: str, context: str
) -> list[ChatMessage]:
    """Deterministic prompt assembly: system (role + guidance), then user."""
    system = agent.system_prompt.format(
        agent=agent.name,
        role=AGENT_ROLES.get(agent.name, "general geospatial work"),
        guidance=ts_guidance,
    ).strip()
    user = subprompt if not context else f"{subprompt}\n\nContext: {context}"
    return [
        ChatMessage(role="system", content=system),
        ChatMessage(role="user", content=user),
    ]


def _dependency_hint(error: ToolError) -> DependencyHint | None:
    if error.code == "MissingProduct":
        product = getattr(error, "product", None)
        return DependencyHint(
            agent="Database",
            reason=f"{product or 'required data'} not loaded",
            product=product,
            kind="missing_product",
        )
    if error.code == "UnknownRegion":
        return DependencyHint(
            agent="Database", reason=str(error), product=None, kind="unknown_region"
        )
    return None


def run_subtask(
    agent: AgentSpec,
    subprompt: str,
    context: str,
    backend,
    config: BackendConfig,
    registry: ToolRegistry,
    session,
    ts_enabled: bool = True,
    on_event: Callable[[str, dict], None] | None = None,
) -> AgentResult:
    """Run one subtask to completion within the agent's tool-round budget."""
    guidance = ""
    if ts_enabled:
        try:
            if agent.namespace_free:
                hits = registry.ts_retrieve_all(subprompt, k=3)
            else:
                hits = registry.ts_retrieve(agent.name, subprompt, k=3)
            guidance = format_guidance(hits, [])
        except EmptyStore:
            guidance = ""

    messages = build_agent_prompt(agent, subprompt, guidance, context)
    usages: list[TokenUsage] = []
    calls: list[ToolCall] = []
    malformed_seen: set[str] = set()

    for _round in range(agent.max_tool_rounds):
        reply, usage = backend.complete(messages, list(agent.toolkit), config)
        usages.append(usage)
        messages = messages + [reply]

        if not reply.tool_calls:
            return AgentResult(
                status="done",
                summary=reply.content,
                dependency_hint=None,
                tool_calls=calls,
                token_usage=usages,
            )

        for call_id, tool_name, args_text in reply.tool_calls:
            try:
                args = json.loads(args_text) if args_text.strip() else {}
                if not isinstance(args, dict):
                    raise ValueError("arguments must be a JSON object")
            except ValueError:
                payload = "MalformedArguments: arguments were not a JSON object"
                calls.append(
                    ToolCall(
                        agent=agent.name,
                        tool=tool_name,
                        args={"raw": args_text},
                        result_status="error",
                        result_payload=payload,
                    )
                )
                messages = messages + [
                    ChatMessage(role="tool", content=payload, tool_call_id=call_id)
                ]
                if tool_name in malformed_seen:
                    return AgentResult(
                        status="failed",
                        summary=f"repeated malformed arguments for {tool_name}",
                        dependency_hint=None,
                        tool_calls=calls,
                        token_usage=usages,
                    )
                malformed_seen.add(tool_name)
                continue

            owner = agent.name
            if agent.namespace_free:
                owner = registry.find_owner(tool_name) or agent.name

            owner_error: ToolError | None = None
            mark = session.recorder.mark()
            try:
                result = registry.dispatch(session, owner, tool_name, args)
                status, payload = "ok", json.dumps(result, sort_keys=True)
            except ToolError as error:
                status, payload = "error", error.payload()
                owner_error = error
            except TypeError as error:
                status, payload = "error", f"MalformedArguments: {error}"

            call = ToolCall(
                agent=owner,
                tool=tool_name,
                args=args,
                result_status=status,
                result_payload=payload,
                accessed=session.recorder.since(mark),
            )
            calls.append(call)
            if on_event:
                on_event(
                    "tool_call",
                    {"agent": owner, "tool": tool_name, "status": status},
                )
            messages = messages + [
                ChatMessage(role="tool", content=payload, tool_call_id=call_id)
            ]

            if owner_error is not None:
                hint = _dependency_hint(owner_error)
                if hint is not None:
                    return AgentResult(
                        status="needs_dependency",
                        summary=payload,
                        dependency_hint=hint,
                        tool_calls=calls,
                        token_usage=usages,
                    )

    return AgentResult(
        status="failed",
        summary=f"tool rounds exhausted after {agent.max_tool_rounds}",
        dependency_hint=None,
        tool_calls=calls,
        token_usage=usages,
    )


def context_digest(prior_summaries: Sequence[str], session) -> str:
    """Bounded hand-off summary: prior statuses plus produced handles."""
    parts = list(prior_summaries)
    handles = [f"{h.id}={h.product}/{h.region}" for h in session.handles.values()]
    if handles:
        parts.append("handles: " + ", ".join(handles))
    digest = "; ".join(parts)
    words = digest.split()
    if len(words) > CONTEXT_DIGEST_TOKENS:
        digest = " ".join(words[:CONTEXT_DIGEST_TOKENS])
    return digest
