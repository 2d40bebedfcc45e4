"""Agent toolkits plus the two retrieval subsystems.

TS (tool selection) retrieves per-agent prompt->tools exemplars; WM
(workflow memory) retrieves whole-workflow exemplars.  Both rank by
TF-IDF cosine similarity: deterministic, dependency-free, recomputed on
every insertion since stores stay small.  A vectorizer hook can replace
TF-IDF with learned embeddings; the default never requires one.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .backend import count_tokens, render_tool_schema
from .core import ToolSpec, read_jsonl, write_jsonl
from .errors import DuplicateTool, EmptyStore, ToolIsolationError

_WORD_RE = re.compile(r"\w+")


def _tokenize(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class ToolExemplar:
    """A solved prompt paired with the tools one agent used for it."""

    prompt_text: str
    agent: str
    tools_used: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tools_used", tuple(self.tools_used))
        if not self.tools_used:
            raise ValueError("tool exemplar needs at least one tool")

    def to_dict(self) -> dict:
        return {
            "prompt_text": self.prompt_text,
            "agent": self.agent,
            "tools_used": list(self.tools_used),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ToolExemplar":
        return cls(d["prompt_text"], d["agent"], tuple(d["tools_used"]))


@dataclass(frozen=True)
class WorkflowExemplar:
    """A solved prompt paired with the agent order that solved it."""

    prompt_text: str
    agents_involved: tuple[str, ...]
    schedule_sketch: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "agents_involved", tuple(self.agents_involved))
        object.__setattr__(
            self, "schedule_sketch", tuple(tuple(s) for s in self.schedule_sketch)
        )
        if not self.agents_involved:
            raise ValueError("workflow exemplar needs at least one agent")

    def to_dict(self) -> dict:
        return {
            "prompt_text": self.prompt_text,
            "agents_involved": list(self.agents_involved),
            "schedule_sketch": [list(s) for s in self.schedule_sketch],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "WorkflowExemplar":
        return cls(
            d["prompt_text"],
            tuple(d["agents_involved"]),
            tuple(tuple(s) for s in d.get("schedule_sketch", [])),
        )


class SimilarityIndex:
    """TF-IDF document index with cosine scoring.

    Log-scaled term frequency, smoothed inverse document frequency,
    L2-normalized vectors; cosine of a document with itself is 1.
    """

    def __init__(self, vectorizer: Callable[[str], Mapping[str, float]] | None = None):
        self._texts: list[str] = []
        self._vectors: list[dict[str, float]] = []
        self._idf: dict[str, float] = {}
        self._vectorizer = vectorizer

    def __len__(self) -> int:
        return len(self._texts)

    def add(self, text: str) -> None:
        self._texts.append(text)
        self._rebuild()

    def _weights(self, text: str) -> dict[str, float]:
        counts: dict[str, int] = {}
        for term in _tokenize(text):
            counts[term] = counts.get(term, 0) + 1
        return {
            term: (1.0 + math.log(tf)) * self._idf.get(term, 0.0)
            for term, tf in counts.items()
        }

    @staticmethod
    def _normalize(vector: dict[str, float]) -> dict[str, float]:
        norm = math.sqrt(sum(w * w for w in vector.values()))
        if norm == 0.0:
            return {}
        return {t: w / norm for t, w in vector.items()}

    def _rebuild(self) -> None:
        if self._vectorizer is not None:
            self._vectors = [
                self._normalize(dict(self._vectorizer(t))) for t in self._texts
            ]
            return
        df: dict[str, int] = {}
        for text in self._texts:
            for term in set(_tokenize(text)):
                df[term] = df.get(term, 0) + 1
        n = len(self._texts)
        self._idf = {
            term: math.log((1 + n) / (1 + count)) + 1.0 for term, count in df.items()
        }
        self._vectors = [self._normalize(self._weights(t)) for t in self._texts]

    def scores(self, query: str) -> list[float]:
        if self._vectorizer is not None:
            qvec = self._normalize(dict(self._vectorizer(query)))
        else:
            qvec = self._normalize(self._weights(query))
        out = []
        for vector in self._vectors:
            small, large = (qvec, vector) if len(qvec) < len(vector) else (vector, qvec)
            out.append(sum(w * large.get(t, 0.0) for t, w in small.items()))
        return out


def rank_hits(scores: Sequence[float], k: int) -> list[int]:
    """Indices of the top-k scores, descending, insertion order on ties."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:k]


class ToolRegistry:
    """Startup-built, read-only-at-runtime registry of agent toolkits."""

    def __init__(self):
        self._tools: dict[str, dict[str, ToolSpec]] = {}
        self._handlers: dict[str, dict[str, Callable]] = {}
        self._global_names: set[str] = set()
        self._ts_exemplars: dict[str, list[ToolExemplar]] = {}
        self._ts_index: dict[str, SimilarityIndex] = {}
        self._wm_exemplars: list[WorkflowExemplar] = []
        self._wm_index = SimilarityIndex()

    # -- tools --

    def register_tool(self, spec: ToolSpec, handler: Callable) -> ToolSpec:
        if spec.name in self._global_names:
            raise DuplicateTool(f"tool name {spec.name!r} already registered")
        cost = count_tokens(render_tool_schema(spec))
        spec = replace(spec, schema_token_cost=cost)
        self._tools.setdefault(spec.agent, {})[spec.name] = spec
        self._handlers.setdefault(spec.agent, {})[spec.name] = handler
        self._global_names.add(spec.name)
        return spec

    def has_tool(self, agent: str, name: str) -> bool:
        return name in self._tools.get(agent, {})

    def get_tool(self, agent: str, name: str) -> ToolSpec:
        return self._tools[agent][name]

    def find_owner(self, name: str) -> str | None:
        for agent, tools in self._tools.items():
            if name in tools:
                return agent
        return None

    def tools_for(self, agent: str) -> list[ToolSpec]:
        return [self._tools[agent][n] for n in sorted(self._tools.get(agent, {}))]

    def all_tools(self) -> list[ToolSpec]:
        out: list[ToolSpec] = []
        for agent in sorted(self._tools):
            out.extend(self.tools_for(agent))
        return out

    def agents(self) -> list[str]:
        return sorted(self._tools)

    def size(self) -> int:
        return len(self._global_names)

    def dispatch(self, session, agent: str, name: str, args: Mapping) -> dict:
        """Run a tool handler; the agent must own the tool."""
        if not self.has_tool(agent, name):
            owner = self.find_owner(name)
            if owner is not None and owner != agent:
                raise ToolIsolationError(
                    f"agent {agent} attempted tool {name} owned by {owner}"
                )
            raise KeyError(f"unknown tool {agent}.{name}")
        return self._handlers[agent][name](session, **args)

    def manifest(self) -> list[dict]:
        return [
            {
                "name": t.name,
                "agent": t.agent,
                "description": t.description,
                "schema_token_cost": t.schema_token_cost,
            }
            for t in self.all_tools()
        ]

    def export_manifest(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.manifest(), indent=1), encoding="utf-8")

    # -- TS / WM stores --

    def add_tool_exemplar(self, exemplar: ToolExemplar) -> None:
        for tool in exemplar.tools_used:
            if not self.has_tool(exemplar.agent, tool):
                raise KeyError(
                    f"exemplar references unknown tool {exemplar.agent}.{tool}"
                )
        self._ts_exemplars.setdefault(exemplar.agent, []).append(exemplar)
        self._ts_index.setdefault(exemplar.agent, SimilarityIndex()).add(
            exemplar.prompt_text
        )

    def add_workflow_exemplar(self, exemplar: WorkflowExemplar) -> None:
        self._wm_exemplars.append(exemplar)
        self._wm_index.add(exemplar.prompt_text)

    def ts_retrieve(self, agent: str, query_text: str, k: int = 3) -> list[tuple[ToolExemplar, float]]:
        if k < 1:
            raise ValueError("k must be at least 1")
        exemplars = self._ts_exemplars.get(agent, [])
        if not exemplars:
            raise EmptyStore(f"no tool exemplars stored for agent {agent}")
        scores = self._ts_index[agent].scores(query_text)
        return [(exemplars[i], scores[i]) for i in rank_hits(scores, k)]

    def ts_retrieve_all(self, query_text: str, k: int = 3) -> list[tuple[ToolExemplar, float]]:
        """TS over every agent's exemplars; used by the single-agent baseline."""
        merged: list[tuple[ToolExemplar, float]] = []
        for agent in sorted(self._ts_exemplars):
            scores = self._ts_index[agent].scores(query_text)
            merged.extend(zip(self._ts_exemplars[agent], scores))
        if not merged:
            raise EmptyStore("no tool exemplars stored")
        order = sorted(range(len(merged)), key=lambda i: (-merged[i][1], i))
        return [merged[i] for i in order[:k]]

    def wm_retrieve(self, query_text: str, k: int = 2) -> list[tuple[WorkflowExemplar, float]]:
        if k < 1:
            raise ValueError("k must be at least 1")
        if not self._wm_exemplars:
            raise EmptyStore("workflow memory store is empty")
        scores = self._wm_index.scores(query_text)
        return [(self._wm_exemplars[i], scores[i]) for i in rank_hits(scores, k)]

    def ts_store_size(self, agent: str | None = None) -> int:
        if agent is not None:
            return len(self._ts_exemplars.get(agent, []))
        return sum(len(v) for v in self._ts_exemplars.values())

    def wm_store_size(self) -> int:
        return len(self._wm_exemplars)

    def iter_ts_exemplars(self) -> Iterable[ToolExemplar]:
        for agent in sorted(self._ts_exemplars):
            yield from self._ts_exemplars[agent]

    def iter_wm_exemplars(self) -> Iterable[WorkflowExemplar]:
        yield from self._wm_exemplars

    def load_ts_store(self, path: str | Path) -> None:
        for record in read_jsonl(path):
            self.add_tool_exemplar(ToolExemplar.from_dict(record))

    def load_wm_store(self, path: str | Path) -> None:
        for record in read_jsonl(path):
            self.add_workflow_exemplar(WorkflowExemplar.from_dict(record))

    def save_stores(self, ts_path: str | Path, wm_path: str | Path) -> None:
        write_jsonl(ts_path, (e.to_dict() for e in self.iter_ts_exemplars()))
        write_jsonl(wm_path, (e.to_dict() for e in self.iter_wm_exemplars()))


# --- Filler tools -------------------------------------------------------------

# Vocabulary deliberately disjoint from task prompts so filler never wins
# TS retrieval; it exists to occupy realistic schema tokens.
_FILLER_VERBS = (
    "calibrate", "reconcile", "reindex", "compact", "mirror",
    "checksum", "throttle", "partition", "interleave", "quantize",
)
_FILLER_NOUNS = (
    "manifest", "lineage", "cache", "quota", "digest",
    "ledger", "replica", "cursor", "batch", "envelope",
)
_FILLER_PARAMS = (
    ("profile_name", "string"),
    ("retention_days", "integer"),
    ("verbose_output", "boolean"),
    ("priority_level", "integer"),
    ("dry_run", "boolean"),
)
_FILLER_PAD = ("strictly", "atomically", "incrementally", "lazily", "defensively")

FILLER_COST_MIN = 33
FILLER_COST_MAX = 40


def generate_filler_tools(domain: str, count: int, seed: int) -> list[ToolSpec]:
    """Deterministic synthetic tools with schema costs in a fixed band.

    The band keeps the single-agent context arithmetic predictable for the
    domain-scaling ablation (~65 tools/domain at ~33-40 tokens each).
    """
    import random

    rng = random.Random(f"filler:{domain}:{seed}")
    tools: list[ToolSpec] = []
    for i in range(count):
        verb = rng.choice(_FILLER_VERBS)
        noun = rng.choice(_FILLER_NOUNS)
        name = f"{domain}_{verb}_{noun}_{i:03d}"
        params = tuple(
            (p, t, j == 0)
            for j, (p, t) in enumerate(rng.sample(_FILLER_PARAMS, 2))
        )
        description = (
            f"{verb.capitalize()} the {domain} {noun} pipeline state for "
            f"downstream bookkeeping audits"
        )
        spec = ToolSpec(name=name, agent="", description=description, params=params)
        pads = list(_FILLER_PAD)
        rng.shuffle(pads)
        while count_tokens(render_tool_schema(replace(spec, agent=domain))) < FILLER_COST_MIN and pads:
            description = f"{description} {pads.pop()}"
            spec = replace(spec, description=description)
        tools.append(spec)
    return tools


def fill_domain_tools(
    registry: ToolRegistry, agent: str, domain: str, target_total: int, seed: int
) -> int:
    """Top an agent's toolkit up to target_total with filler tools."""
    have = len(registry.tools_for(agent))
    need = max(0, target_total - have)
    for spec in generate_filler_tools(domain, need, seed):
        registry.register_tool(
            replace(spec, agent=agent),
            lambda session, **kwargs: {"status": "ok"},
        )
    return need


# --- Guidance rendering --------------------------------------------------------


def format_guidance(
    ts_hits: Sequence[tuple[ToolExemplar, float]],
    wm_hits: Sequence[tuple[WorkflowExemplar, float]],
) -> str:
    """Render retrieval hits in the agent prompting layout."""
    lines: list[str] = []
    for exemplar, _score in ts_hits:
        lines.append(f'Similar prompt: "{exemplar.prompt_text}"')
        lines.append(
            "Tools used: " + ", ".join(f"{t}()" for t in exemplar.tools_used)
        )
    for exemplar, _score in wm_hits:
        lines.append(f'Similar workflow: "{exemplar.prompt_text}"')
        lines.append("Agents involved: " + ", ".join(exemplar.agents_involved))
    return "\n".join(lines)
