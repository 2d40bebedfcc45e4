#!/usr/bin/env python3
"""Run the strategy-comparison experiment on the scripted backend.

Generates a dataset (unless one is supplied), runs all four orchestration
strategies twice -- once gold-faithful, once with a missing-load failure
injected per recoverable task -- and prints the report tables.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from geosquad.bench import run_benchmark
from geosquad.config import EngineConfig, with_overrides
from geosquad.engine import build_engine
from geosquad.evaluator import render_report
from geosquad.sandbox import Sandbox
from geosquad.scripting import eligible_for_missing_load
from geosquad.taskgen import generate_dataset, write_dataset

STRATEGIES = ["single_agent", "composition_only", "ledger_loop", "hybrid"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-agent", type=int, default=25)
    parser.add_argument("--dataset", default=None, help="existing dataset dir")
    parser.add_argument("--out", default="reports/experiments")
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args()

    dataset_dir = args.dataset
    if dataset_dir is None:
        sandbox = Sandbox.generate(args.seed)
        tasks, golds, manifest = generate_dataset(
            seed=args.seed, per_agent_count=args.per_agent, sandbox=sandbox
        )
        dataset_dir = Path("datasets") / f"seed{args.seed}"
        write_dataset(dataset_dir, tasks, golds, manifest, sandbox)
        print(f"dataset: {dataset_dir} ({len(manifest.split['benchmark'])} benchmark tasks)")

    base = EngineConfig(sandbox_seed=args.seed, workers=args.workers)

    print("\n== gold-faithful scripted backend ==")
    engine = build_engine(with_overrides(base, dataset_dir=str(dataset_dir)))
    reports = run_benchmark(engine, STRATEGIES, out_dir=Path(args.out) / "faithful")
    print(render_report(reports)[0])

    print("== one injected MissingProduct failure per recoverable task ==")
    engine = build_engine(
        with_overrides(base, dataset_dir=str(dataset_dir), scripted_mode="missing_load")
    )
    golds = engine.golds_by_id()
    fixture = [
        t for t in engine.benchmark_tasks() if eligible_for_missing_load(t, golds[t.id])
    ]
    print(f"recoverable fixture: {len(fixture)} tasks")
    reports = run_benchmark(
        engine,
        ["composition_only", "ledger_loop", "hybrid"],
        out_dir=Path(args.out) / "recovery",
        tasks=fixture,
    )
    print(render_report(reports)[0])
    return 0


if __name__ == "__main__":
    sys.exit(main())
