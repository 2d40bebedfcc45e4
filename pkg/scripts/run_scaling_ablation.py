#!/usr/bin/env python3
"""Domain-scaling ablation: single-agent vs hybrid under a tight budget.

Sweeps the registered domain count from 1 to 8 with ~65 tools per domain
and reports, per count, the schema token load and how many tasks finish
versus overflow the context window.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from geosquad.backend import schema_tokens
from geosquad.bench import run_strategy
from geosquad.config import EngineConfig, ablation_domains, with_overrides
from geosquad.engine import build_engine
from geosquad.orchestrator import StrategyConfig
from geosquad.sandbox import Sandbox
from geosquad.taskgen import generate_dataset, write_dataset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--per-agent", type=int, default=25)
    parser.add_argument("--budget", type=int, default=8192)
    parser.add_argument("--tools-per-domain", type=int, default=65)
    parser.add_argument("--dataset", default=None)
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

    header = f"{'domains':>7} {'tools':>6} {'schema_tok':>10} {'strategy':>13} {'completed':>9} {'overflow':>8}"
    print(f"budget = {args.budget} tokens, {args.tools_per_domain} tools/domain")
    print(header)
    for count in range(1, 9):
        for strategy_name in ("single_agent", "hybrid"):
            config = with_overrides(
                EngineConfig(sandbox_seed=args.seed, workers=args.workers),
                dataset_dir=str(dataset_dir),
                budget=args.budget,
                per_domain_tools=args.tools_per_domain,
                domains=ablation_domains(count),
            )
            engine = build_engine(config)
            traces = run_strategy(
                engine,
                StrategyConfig(strategy=strategy_name),
                engine.benchmark_tasks(),
                workers=args.workers,
            )
            completed = sum(1 for t in traces if t.terminal == "completed")
            overflow = sum(1 for t in traces if t.terminal == "context_overflow")
            tokens = schema_tokens(engine.registry.all_tools())
            print(
                f"{count:>7} {engine.registry.size():>6} {tokens:>10} "
                f"{strategy_name:>13} {completed:>9} {overflow:>8}"
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
