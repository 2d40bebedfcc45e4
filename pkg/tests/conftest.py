"""Shared fixtures: a small dataset, registry with memories, backends."""

from __future__ import annotations

import pytest

from geosquad.backend import BackendConfig, make_backend
from geosquad.sandbox import Sandbox
from geosquad.scripting import compile_behavior
from geosquad.taskgen import compile_memories, generate_dataset
from geosquad.toolkit import build_registry

SMALL_SEED = 7


@pytest.fixture(scope="session")
def small_sandbox():
    return Sandbox.generate(SMALL_SEED)


@pytest.fixture(scope="session")
def small_dataset(small_sandbox):
    tasks, golds, manifest = generate_dataset(
        seed=SMALL_SEED, per_agent_count=2, sandbox=small_sandbox
    )
    return tasks, golds, manifest


def registry_with_memories(tasks, golds, manifest, total_tools=521, domains=None, per_domain=0):
    registry = build_registry(
        domains=domains,
        per_domain_tools=per_domain,
        total_tools=total_tools if not per_domain else 0,
        seed=SMALL_SEED,
    )
    exemplar_ids = set(manifest.split["exemplar"])
    ts_store, wm_store = compile_memories(
        [t for t in tasks if t.id in exemplar_ids],
        [g for g in golds if g.task_id in exemplar_ids],
    )
    registered = set(registry.agents())
    for exemplar in ts_store:
        if exemplar.agent in registered:
            registry.add_tool_exemplar(exemplar)
    for exemplar in wm_store:
        registry.add_workflow_exemplar(exemplar)
    return registry


@pytest.fixture(scope="session")
def small_registry(small_dataset):
    tasks, golds, manifest = small_dataset
    return registry_with_memories(tasks, golds, manifest)


@pytest.fixture(scope="session")
def backend_config():
    return BackendConfig()


@pytest.fixture(scope="session")
def faithful_backend(small_dataset, backend_config):
    tasks, golds, _ = small_dataset
    behavior = compile_behavior(tasks, golds, mode="faithful", seed=SMALL_SEED)
    return make_backend(backend_config, behavior)


@pytest.fixture()
def bench_tasks(small_dataset):
    tasks, _, manifest = small_dataset
    wanted = set(manifest.split["benchmark"])
    return [t for t in tasks if t.id in wanted]


@pytest.fixture()
def golds_by_id(small_dataset):
    _, golds, _ = small_dataset
    return {g.task_id: g for g in golds}
