"""Benchmark runner: every (strategy x task) against a shared registry,
sandbox and backend, traces on disk, Table-style reports out."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .core import ExecutionTrace, GoldSolution, TaskPrompt, dump_trace
from .engine import Engine
from .evaluator import (
    BenchmarkReport,
    aggregate,
    score_task,
    vision_scores,
    write_reports,
)
from .orchestrator import StrategyConfig, run_task


def run_strategy(
    engine: Engine,
    strategy: StrategyConfig,
    tasks: Sequence[TaskPrompt],
    workers: int = 1,
    traces_dir: str | Path | None = None,
) -> list[ExecutionTrace]:
    """Run tasks under one strategy; results ordered by task id."""

    def one(task: TaskPrompt) -> ExecutionTrace:
        trace, _session = run_task(
            task,
            strategy,
            engine.backend,
            engine.config.backend,
            engine.registry,
            engine.sandbox,
            prompt_dir=engine.config.prompt_dir,
        )
        return trace

    ordered = sorted(tasks, key=lambda t: t.id)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(one, ordered))
    else:
        traces = [one(task) for task in ordered]

    if traces_dir is not None:
        directory = Path(traces_dir) / strategy.strategy
        directory.mkdir(parents=True, exist_ok=True)
        for trace in traces:
            dump_trace(trace, directory / f"{trace.task_id}.json")
    return traces


def evaluate_traces(
    engine: Engine,
    strategy: StrategyConfig,
    traces: Sequence[ExecutionTrace],
) -> BenchmarkReport:
    golds = engine.golds_by_id()
    scores = [score_task(trace, golds[trace.task_id]) for trace in traces]
    vision_traces = [
        t for t in traces
        if any(c.tool in ("detect_objects", "classify_landcover") for c in t.executed_steps)
        or golds[t.task_id].steps[0].agent_name == "Vision"
    ]
    vision = vision_scores(vision_traces, engine.sandbox.annotations)
    return aggregate(
        scores,
        strategy=strategy.strategy,
        ts=strategy.ts_enabled,
        wm=strategy.wm_enabled,
        vision=vision,
    )


def run_benchmark(
    engine: Engine,
    strategies: Sequence[str | StrategyConfig],
    out_dir: str | Path | None = None,
    tasks: Sequence[TaskPrompt] | None = None,
) -> list[BenchmarkReport]:
    """Full benchmark across strategies; writes traces and reports when
    out_dir is given and returns one report row per strategy."""
    out_dir = Path(out_dir) if out_dir is not None else None
    tasks = list(tasks) if tasks is not None else engine.benchmark_tasks()
    reports: list[BenchmarkReport] = []
    for entry in strategies:
        strategy = (
            entry
            if isinstance(entry, StrategyConfig)
            else replace(engine.config.strategy, strategy=entry)
        )
        traces = run_strategy(
            engine,
            strategy,
            tasks,
            workers=engine.config.workers,
            traces_dir=(out_dir / "traces") if out_dir else None,
        )
        reports.append(evaluate_traces(engine, strategy, traces))
    if out_dir is not None:
        write_reports(reports, out_dir)
    return reports


def any_context_overflow(reports: Sequence[BenchmarkReport]) -> bool:
    return any(r.terminal_counts.get("context_overflow", 0) > 0 for r in reports)
