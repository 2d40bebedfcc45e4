"""Chat-completion backends with token accounting and a hard context budget.

Two implementations share one interface: a deterministic scripted backend
(driven by a pattern -> replies table, the test and benchmark oracle) and
an HTTP client speaking the de-facto chat-completions JSON protocol.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import httpx

from .core import TokenUsage, ToolSpec
from .errors import ContextOverflow, DuplicateTool, TransportError

_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")

API_KEY_ENV = "GEOSQUAD_API_KEY"


def count_tokens(text: str) -> int:
    """Deterministic whitespace-and-punctuation token count.

    One token per word-like unit, one per punctuation run; the empty
    string counts zero.  Monotone under concatenation.
    """
    if not text:
        return 0
    return len(_TOKEN_RE.findall(text))


@dataclass(frozen=True)
class ChatMessage:
    """One turn in a chat-completion conversation.

    tool_calls entries are (call_id, tool_name, args_text) where args_text
    is the raw JSON argument string (kept raw so malformed model output can
    be detected downstream).
    """

    role: str
    content: str = ""
    tool_calls: tuple[tuple[str, str, str], ...] = ()
    tool_call_id: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tool_calls", tuple(tuple(tc) for tc in self.tool_calls))
        if self.role not in ("system", "user", "assistant", "tool"):
            raise ValueError(f"bad message role {self.role!r}")
        if self.role == "tool" and not self.tool_call_id:
            raise ValueError("tool message requires tool_call_id")
        if self.role == "assistant" and not self.content and not self.tool_calls:
            raise ValueError("assistant message needs content or tool calls")

    def token_cost(self) -> int:
        cost = count_tokens(self.role) + count_tokens(self.content)
        for _, name, args_text in self.tool_calls:
            cost += count_tokens(name) + count_tokens(args_text)
        return cost


def conversation_tokens(messages: Iterable[ChatMessage]) -> int:
    return sum(m.token_cost() for m in messages)


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "scripted"
    endpoint: str | None = None
    model_name: str = "scripted"
    context_budget: int = 32768
    max_completion_tokens: int = 1024
    temperature: float = 0.0
    max_concurrency: int = 4

    def __post_init__(self):
        if self.kind not in ("scripted", "http"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http backend requires an endpoint")
        if self.context_budget < 512:
            raise ValueError("context_budget must be at least 512 tokens")
        if self.max_completion_tokens < 1:
            raise ValueError("max_completion_tokens must be positive")


# --- Tool schema rendering --------------------------------------------------

_SEMANTIC_JSON_TYPES = {
    "number": "number",
    "integer": "integer",
    "boolean": "boolean",
}


def render_tool_schema(tool: ToolSpec) -> str:
    """One-line canonical rendering of a single tool schema."""
    params = ", ".join(f"{name}: {sem}" for name, sem, _ in tool.params)
    required = [name for name, _, req in tool.params if req]
    line = f"{tool.agent}.{tool.name}({params}) -- {tool.description}"
    if required:
        line += f" [required: {', '.join(required)}]"
    return line


def render_tool_schemas(tools: Sequence[ToolSpec]) -> str:
    """Canonical schema block: sorted by (agent, name), one line per tool."""
    seen: set[tuple[str, str]] = set()
    for tool in tools:
        key = (tool.agent, tool.name)
        if key in seen:
            raise DuplicateTool(f"duplicate tool {tool.agent}.{tool.name} in schema render")
        seen.add(key)
    ordered = sorted(tools, key=lambda t: (t.agent, t.name))
    return "\n".join(render_tool_schema(t) for t in ordered)


def schema_tokens(tools: Sequence[ToolSpec]) -> int:
    return sum(t.schema_token_cost for t in tools)


# --- Scripted backend --------------------------------------------------------


@dataclass(frozen=True)
class ScriptReply:
    """Either a final text answer or a batch of tool calls."""

    text: str | None = None
    tool_calls: tuple[tuple[str, dict], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "tool_calls", tuple((n, dict(a)) for n, a in self.tool_calls)
        )
        if (self.text is None) == (not self.tool_calls):
            raise ValueError("reply must be exactly one of text or tool calls")


@dataclass(frozen=True)
class ScriptRule:
    """Replies played back, in order, for conversations matching pattern."""

    pattern: str
    replies: tuple[ScriptReply, ...]

    def __post_init__(self):
        object.__setattr__(self, "replies", tuple(self.replies))
        if not self.pattern:
            raise ValueError("script rule needs a nonempty pattern")


@dataclass(frozen=True)
class Perturbation:
    """Deterministic corruption of a rule's tool-call sequence.

    kind: drop_step (params: index), swap_steps (params: i, j) or
    wrong_args (params: tool) -- applied to the flattened tool-call list.
    """

    kind: str
    index: int = 0
    second: int = 0
    tool: str = ""

    def apply(self, replies: Sequence[ScriptReply]) -> tuple[ScriptReply, ...]:
        calls: list[tuple[str, dict]] = []
        shape: list[int] = []
        texts: list[str | None] = []
        for reply in replies:
            if reply.text is not None:
                shape.append(0)
                texts.append(reply.text)
            else:
                shape.append(len(reply.tool_calls))
                texts.append(None)
                calls.extend(reply.tool_calls)

        if self.kind == "drop_step":
            if 0 <= self.index < len(calls):
                del calls[self.index]
        elif self.kind == "swap_steps":
            i, j = self.index, self.second
            if 0 <= i < len(calls) and 0 <= j < len(calls):
                calls[i], calls[j] = calls[j], calls[i]
        elif self.kind == "wrong_args":
            for pos, (name, _) in enumerate(calls):
                if name == self.tool:
                    calls[pos] = (name, {"bogus": "perturbed"})
                    break
        else:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")

        # Rebuild replies greedily against the original shape; a tool reply
        # emptied by drop_step disappears entirely.
        out: list[ScriptReply] = []
        cursor = 0
        for count, text in zip(shape, texts):
            if text is not None:
                out.append(ScriptReply(text=text))
                continue
            take = calls[cursor : cursor + count]
            cursor += count
            if take:
                out.append(ScriptReply(tool_calls=tuple(take)))
        return tuple(out)


@dataclass(frozen=True)
class ScriptedBehavior:
    """Pattern -> replies playback table.

    Matching scans the latest user message (system as fallback) for the
    longest rule pattern contained in it; the reply index is the number of
    assistant turns already in the conversation, so playback is a pure
    function of (history, table).
    """

    rules: tuple[ScriptRule, ...] = ()
    default_reply: ScriptReply = field(default_factory=lambda: ScriptReply(text="done"))
    perturbation: Perturbation | None = None

    def __post_init__(self):
        rules = self.rules
        if self.perturbation is not None:
            rules = tuple(
                ScriptRule(r.pattern, self.perturbation.apply(r.replies)) for r in rules
            )
        ordered = sorted(
            enumerate(rules), key=lambda ir: (-len(ir[1].pattern), ir[0])
        )
        object.__setattr__(self, "rules", tuple(r for _, r in ordered))

    def _latest_content(self, messages: Sequence[ChatMessage], role: str) -> str:
        for message in reversed(messages):
            if message.role == role:
                return message.content
        return ""

    def reply_for(self, messages: Sequence[ChatMessage]) -> ScriptReply:
        assistant_turns = sum(1 for m in messages if m.role == "assistant")
        for content in (
            self._latest_content(messages, "user"),
            self._latest_content(messages, "system"),
        ):
            if not content:
                continue
            for rule in self.rules:
                if rule.pattern in content:
                    if assistant_turns < len(rule.replies):
                        return rule.replies[assistant_turns]
                    return self.default_reply
        return self.default_reply


class ScriptedBackend:
    """Deterministic, stateless playback backend."""

    def __init__(self, behavior: ScriptedBehavior):
        self.behavior = behavior

    def complete(
        self,
        messages: Sequence[ChatMessage],
        tools: Sequence[ToolSpec],
        config: BackendConfig,
    ) -> tuple[ChatMessage, TokenUsage]:
        input_tokens = conversation_tokens(messages) + schema_tokens(tools)
        if input_tokens > config.context_budget:
            raise ContextOverflow(input_tokens, config.context_budget)
        reply = self.behavior.reply_for(messages)
        if reply.text is not None:
            message = ChatMessage(role="assistant", content=reply.text)
        else:
            calls = tuple(
                (f"call_{i}", name, json.dumps(args, sort_keys=True))
                for i, (name, args) in enumerate(reply.tool_calls)
            )
            message = ChatMessage(role="assistant", tool_calls=calls)
        usage = TokenUsage(
            prompt_tokens=input_tokens,
            completion_tokens=message.token_cost(),
            total_tokens=input_tokens + message.token_cost(),
        )
        return message, usage


# --- HTTP backend ------------------------------------------------------------


def _param_json_type(semantic: str) -> str:
    return _SEMANTIC_JSON_TYPES.get(semantic, "string")


def tool_to_wire(tool: ToolSpec) -> dict:
    """Chat-completions function schema for one tool."""
    properties = {
        name: {"type": _param_json_type(sem), "description": sem}
        for name, sem, _ in tool.params
    }
    return {
        "type": "function",
        "function": {
            "name": tool.name,
            "description": tool.description,
            "parameters": {
                "type": "object",
                "properties": properties,
                "required": [name for name, _, req in tool.params if req],
            },
        },
    }


def message_to_wire(message: ChatMessage) -> dict:
    wire: dict[str, Any] = {"role": message.role}
    if message.content or not message.tool_calls:
        wire["content"] = message.content
    if message.tool_calls:
        wire["tool_calls"] = [
            {
                "id": call_id,
                "type": "function",
                "function": {"name": name, "arguments": args_text},
            }
            for call_id, name, args_text in message.tool_calls
        ]
    if message.tool_call_id:
        wire["tool_call_id"] = message.tool_call_id
    return wire


class HttpBackend:
    """Chat-completions client with bounded retries and concurrency."""

    max_attempts = 3
    backoff_start = 0.5

    def __init__(
        self,
        config: BackendConfig,
        api_key: str | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.config = config
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self._semaphore = threading.Semaphore(config.max_concurrency)
        self._client = httpx.Client(timeout=60.0, transport=transport)

    def complete(
        self,
        messages: Sequence[ChatMessage],
        tools: Sequence[ToolSpec],
        config: BackendConfig | None = None,
    ) -> tuple[ChatMessage, TokenUsage]:
        config = config or self.config
        input_tokens = conversation_tokens(messages) + schema_tokens(tools)
        if input_tokens > config.context_budget:
            raise ContextOverflow(input_tokens, config.context_budget)

        body: dict[str, Any] = {
            "model": config.model_name,
            "messages": [message_to_wire(m) for m in messages],
            "temperature": config.temperature,
            "max_tokens": config.max_completion_tokens,
        }
        if tools:
            body["tools"] = [tool_to_wire(t) for t in tools]

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        data = self._post_with_retries(config.endpoint, body, headers)
        choice = data["choices"][0]["message"]
        calls = tuple(
            (
                tc.get("id", f"call_{i}"),
                tc["function"]["name"],
                tc["function"].get("arguments", "{}"),
            )
            for i, tc in enumerate(choice.get("tool_calls") or [])
        )
        message = ChatMessage(
            role="assistant", content=choice.get("content") or "", tool_calls=calls
        )
        reported = (data.get("usage") or {}).get("total_tokens")
        usage = TokenUsage(
            prompt_tokens=input_tokens,
            completion_tokens=message.token_cost(),
            total_tokens=input_tokens + message.token_cost(),
            reported_total_tokens=reported,
        )
        return message, usage

    def _post_with_retries(self, endpoint: str, body: dict, headers: dict) -> dict:
        delay = self.backoff_start
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                with self._semaphore:
                    response = self._client.post(endpoint, json=body, headers=headers)
                if response.status_code < 400:
                    return response.json()
                if response.status_code < 500:
                    # client errors are deterministic; retrying cannot help
                    raise TransportError(
                        f"chat completion rejected ({response.status_code}): {response.text[:200]}"
                    )
                last_error = httpx.HTTPStatusError(
                    f"server error {response.status_code}",
                    request=response.request,
                    response=response,
                )
            except httpx.TransportError as exc:
                last_error = exc
            if attempt + 1 < self.max_attempts:
                time.sleep(delay)
                delay *= 2
        raise TransportError(f"chat completion failed after {self.max_attempts} attempts: {last_error}")


def make_backend(config: BackendConfig, behavior: ScriptedBehavior | None = None):
    if config.kind == "scripted":
        return ScriptedBackend(behavior or ScriptedBehavior())
    return HttpBackend(config)
