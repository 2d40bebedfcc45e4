"""Engine configuration: defaults, TOML loading, CLI overrides."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .backend import BackendConfig
from .core import DOMAINS
from .errors import ConfigError
from .orchestrator import StrategyConfig

# Fixed order for the domain-scaling ablation: support trio first so small
# domain counts still yield runnable tasks.
ABLATION_DOMAIN_ORDER = (
    "database", "dataops", "map", "agriculture", "climate", "urban", "forestry", "vision",
)

DEFAULT_TOTAL_TOOLS = 521


@dataclass(frozen=True)
class EngineConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    dataset_dir: str | None = None
    sandbox_seed: int = 0
    per_domain_tools: int = 0
    total_tools: int = DEFAULT_TOTAL_TOOLS
    domains: tuple[str, ...] | None = None
    workers: int = 1
    out_dir: str = "reports"
    prompt_dir: str | None = None
    scripted_mode: str = "faithful"
    address: str = "127.0.0.1:8008"

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.domains is not None:
            unknown = [d for d in self.domains if d not in DOMAINS]
            if unknown:
                raise ConfigError(f"unknown domains in config: {unknown}")
        if self.dataset_dir is not None and not Path(self.dataset_dir).exists():
            raise ConfigError(f"dataset dir does not exist: {self.dataset_dir}")
        if self.prompt_dir is not None and not Path(self.prompt_dir).exists():
            raise ConfigError(f"prompt dir does not exist: {self.prompt_dir}")


def _backend_from_table(table: Mapping) -> BackendConfig:
    return BackendConfig(
        kind=table.get("kind", "scripted"),
        endpoint=table.get("endpoint"),
        model_name=table.get("model_name", "scripted"),
        context_budget=table.get("context_budget", 32768),
        max_completion_tokens=table.get("max_completion_tokens", 1024),
        temperature=table.get("temperature", 0.0),
        max_concurrency=table.get("max_concurrency", 4),
    )


def _strategy_from_table(table: Mapping) -> StrategyConfig:
    return StrategyConfig(
        strategy=table.get("kind", "hybrid"),
        max_revisions=table.get("max_revisions", 3),
        max_ledger_rounds=table.get("max_ledger_rounds", 20),
        wm_enabled=table.get("wm_enabled", True),
        ts_enabled=table.get("ts_enabled", True),
        max_tool_rounds=table.get("max_tool_rounds", 8),
    )


def load_config(path: str | Path) -> EngineConfig:
    try:
        data = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as error:
        raise ConfigError(f"invalid config file {path}: {error}") from error

    registry = data.get("registry", {})
    dataset = data.get("dataset", {})
    run = data.get("run", {})
    service = data.get("service", {})
    domains = registry.get("domains")
    return EngineConfig(
        backend=_backend_from_table(data.get("backend", {})),
        strategy=_strategy_from_table(data.get("strategy", {})),
        dataset_dir=dataset.get("dir"),
        sandbox_seed=data.get("sandbox", {}).get("seed", 0),
        per_domain_tools=registry.get("per_domain_tools", 0),
        total_tools=registry.get("total_tools", DEFAULT_TOTAL_TOOLS),
        domains=tuple(domains) if domains else None,
        workers=run.get("workers", 1),
        out_dir=run.get("out_dir", "reports"),
        prompt_dir=run.get("prompt_dir"),
        scripted_mode=run.get("scripted_mode", "faithful"),
        address=service.get("address", "127.0.0.1:8008"),
    )


def with_overrides(config: EngineConfig, **overrides) -> EngineConfig:
    """Apply non-None CLI overrides onto a loaded config."""
    backend = config.backend
    strategy = config.strategy
    if overrides.get("budget") is not None:
        backend = replace(backend, context_budget=overrides["budget"])
    if overrides.get("strategy") is not None:
        strategy = replace(strategy, strategy=overrides["strategy"])
    fields: dict = {"backend": backend, "strategy": strategy}
    for name in (
        "dataset_dir", "sandbox_seed", "per_domain_tools", "total_tools",
        "domains", "workers", "out_dir", "scripted_mode", "address",
    ):
        if overrides.get(name) is not None:
            fields[name] = overrides[name]
    return replace(config, **fields)


def ablation_domains(count: int) -> tuple[str, ...]:
    if not 1 <= count <= len(ABLATION_DOMAIN_ORDER):
        raise ConfigError(f"domain count must be in 1..{len(ABLATION_DOMAIN_ORDER)}")
    return ABLATION_DOMAIN_ORDER[:count]
