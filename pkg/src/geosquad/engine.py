"""Assembles sandbox, registry, dataset and backend into one runnable engine."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .backend import ScriptedBehavior, make_backend
from .config import EngineConfig
from .core import GoldSolution, TaskPrompt, load_golds, load_tasks
from .errors import ConfigError
from .registry import ToolExemplar, ToolRegistry, WorkflowExemplar
from .sandbox import Sandbox
from .scripting import compile_behavior
from .taskgen import DatasetManifest
from .toolkit import build_registry


@dataclass
class Engine:
    config: EngineConfig
    sandbox: Sandbox
    registry: ToolRegistry
    backend: object
    tasks: list[TaskPrompt]
    golds: list[GoldSolution]
    manifest: DatasetManifest | None

    def golds_by_id(self) -> dict[str, GoldSolution]:
        return {g.task_id: g for g in self.golds}

    def benchmark_tasks(self) -> list[TaskPrompt]:
        if self.manifest is None:
            return list(self.tasks)
        wanted = set(self.manifest.split["benchmark"])
        return [t for t in self.tasks if t.id in wanted]

    def exemplar_tasks(self) -> list[TaskPrompt]:
        if self.manifest is None:
            return []
        wanted = set(self.manifest.split["exemplar"])
        return [t for t in self.tasks if t.id in wanted]


def load_dataset(directory: str | Path) -> tuple[list[TaskPrompt], list[GoldSolution], DatasetManifest]:
    directory = Path(directory)
    tasks = load_tasks(directory / "tasks.jsonl")
    golds = load_golds(directory / "golds.jsonl")
    manifest = DatasetManifest.from_dict(
        json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    )
    return tasks, golds, manifest


def _load_stores(registry: ToolRegistry, directory: Path) -> None:
    """Load TS/WM exemplars, skipping agents absent under a domain subset."""
    ts_path = directory / "ts_store.jsonl"
    wm_path = directory / "wm_store.jsonl"
    if ts_path.exists():
        from .core import read_jsonl

        registered = set(registry.agents())
        for record in read_jsonl(ts_path):
            exemplar = ToolExemplar.from_dict(record)
            if exemplar.agent in registered:
                registry.add_tool_exemplar(exemplar)
    if wm_path.exists():
        from .core import read_jsonl

        for record in read_jsonl(wm_path):
            registry.add_workflow_exemplar(WorkflowExemplar.from_dict(record))


def build_engine(config: EngineConfig, behavior: ScriptedBehavior | None = None) -> Engine:
    sandbox = Sandbox.generate(config.sandbox_seed)
    registry = build_registry(
        domains=config.domains,
        per_domain_tools=config.per_domain_tools,
        total_tools=config.total_tools if not config.per_domain_tools else 0,
        seed=config.sandbox_seed,
    )

    tasks: list[TaskPrompt] = []
    golds: list[GoldSolution] = []
    manifest: DatasetManifest | None = None
    if config.dataset_dir:
        tasks, golds, manifest = load_dataset(config.dataset_dir)
        if manifest.fixture_hash != sandbox.fixture_hash():
            raise ConfigError(
                "dataset fixture hash does not match the configured sandbox seed"
            )
        if config.domains is not None:
            allowed = set(config.domains)
            tasks = [t for t in tasks if t.domain in allowed]
            ids = {t.id for t in tasks}
            golds = [g for g in golds if g.task_id in ids]
        _load_stores(registry, Path(config.dataset_dir))

    if config.backend.kind == "scripted" and behavior is None:
        if tasks:
            behavior = compile_behavior(
                tasks, golds, mode=config.scripted_mode, seed=config.sandbox_seed
            )
        else:
            behavior = ScriptedBehavior()
    backend = make_backend(config.backend, behavior)
    return Engine(
        config=config,
        sandbox=sandbox,
        registry=registry,
        backend=backend,
        tasks=tasks,
        golds=golds,
        manifest=manifest,
    )
