"""Operator CLI: geosquad gen | bench | chat | serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import any_context_overflow, run_benchmark
from .config import (
    EngineConfig,
    ablation_domains,
    load_config,
    with_overrides,
)
from .core import dump_trace
from .engine import build_engine
from .errors import ConfigError, GeoSquadError, TemplateGapError
from .evaluator import render_report
from .orchestrator import run_task
from .sandbox import Sandbox
from .service import extract_region, make_chat_task
from .taskgen import (
    DEFAULT_PER_AGENT,
    FULL_PER_AGENT,
    generate_dataset,
    write_dataset,
)


def _base_config(args) -> EngineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return EngineConfig()


def cmd_gen(args) -> int:
    per_agent = FULL_PER_AGENT if args.full else args.per_agent
    seed = args.seed
    sandbox = Sandbox.generate(seed)
    try:
        tasks, golds, manifest = generate_dataset(
            seed=seed, per_agent_count=per_agent, sandbox=sandbox
        )
    except TemplateGapError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path("datasets") / f"seed{seed}"
    write_dataset(out, tasks, golds, manifest, sandbox)
    print(f"dataset written to {out}")
    print(
        f"  tasks: {len(manifest.split['benchmark'])} benchmark + "
        f"{len(manifest.split['exemplar'])} exemplars"
    )
    print(f"  fixture hash: {manifest.fixture_hash[:16]}...")
    return 0


def cmd_bench(args) -> int:
    config = _base_config(args)
    domains = ablation_domains(args.domains) if args.domains else None
    config = with_overrides(
        config,
        dataset_dir=args.dataset,
        budget=args.budget,
        domains=domains,
        workers=args.workers,
        out_dir=args.out,
        sandbox_seed=args.seed,
        scripted_mode=args.scripted_mode,
    )
    if config.dataset_dir is None:
        print("error: bench requires --dataset or a config with dataset.dir", file=sys.stderr)
        return 2
    engine = build_engine(config)
    strategies = [s.strip() for s in args.strategy.split(",") if s.strip()]
    reports = run_benchmark(engine, strategies, out_dir=config.out_dir)
    table, _csv = render_report(reports)
    print(table)
    if any_context_overflow(reports) and not args.allow_failures:
        print("error: context_overflow terminals present", file=sys.stderr)
        return 1
    return 0


def cmd_chat(args) -> int:
    prompt = args.prompt.strip()
    if not prompt:
        print("error: empty prompt", file=sys.stderr)
        return 2
    config = _base_config(args)
    config = with_overrides(
        config, dataset_dir=args.dataset, sandbox_seed=args.seed, out_dir=args.out
    )
    engine = build_engine(config)
    task = make_chat_task(engine, "chat", prompt)
    trace, session = run_task(
        task,
        engine.config.strategy,
        engine.backend,
        engine.config.backend,
        engine.registry,
        engine.sandbox,
        prompt_dir=engine.config.prompt_dir,
    )
    print(f"terminal: {trace.terminal}")
    print(f"answer: {trace.final_answer}")
    snapshot = session.map_snapshot()
    print(f"map layers: {len(snapshot['layers'])}")
    for layer in snapshot["layers"]:
        print(f"  - {layer['product']} {layer['region']} {layer['date']} ({layer['style']})")
    print(f"tokens: {trace.token_usage.total_tokens}")
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "chat_trace.json"
    dump_trace(trace, trace_path)
    print(f"trace: {trace_path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _base_config(args)
    config = with_overrides(
        config, dataset_dir=args.dataset, sandbox_seed=args.seed, address=args.address
    )
    engine = build_engine(config)
    static_dir = args.static if args.static and Path(args.static).exists() else None
    app = create_app(engine, static_dir=static_dir)
    host, _, port = config.address.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8008), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geosquad", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a benchmark dataset")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--per-agent", type=int, default=DEFAULT_PER_AGENT)
    gen.add_argument("--full", action="store_true", help="full-scale 250 tasks per agent")
    gen.add_argument("--out", default=None)
    gen.add_argument("--config", default=None)
    gen.set_defaults(func=cmd_gen)

    bench = sub.add_parser("bench", help="run the benchmark harness")
    bench.add_argument("--config", default=None)
    bench.add_argument("--dataset", default=None)
    bench.add_argument("--strategy", default="hybrid", help="comma-separated strategies")
    bench.add_argument("--domains", type=int, default=None, help="ablation: first N domains")
    bench.add_argument("--budget", type=int, default=None, help="context budget override")
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--workers", type=int, default=None)
    bench.add_argument("--out", default=None)
    bench.add_argument("--scripted-mode", default=None, choices=["faithful", "drop_one", "missing_load"])
    bench.add_argument("--allow-failures", action="store_true")
    bench.set_defaults(func=cmd_bench)

    chat = sub.add_parser("chat", help="run one prompt through the hybrid engine")
    chat.add_argument("prompt")
    chat.add_argument("--config", default=None)
    chat.add_argument("--dataset", default=None)
    chat.add_argument("--seed", type=int, default=None)
    chat.add_argument("--out", default=None)
    chat.set_defaults(func=cmd_chat)

    serve = sub.add_parser("serve", help="serve the HTTP API for the web UI")
    serve.add_argument("--config", default=None)
    serve.add_argument("--dataset", default=None)
    serve.add_argument("--seed", type=int, default=None)
    serve.add_argument("--address", default=None)
    serve.add_argument("--static", default=None, help="directory of built UI assets")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as error:
        print(f"config error: {error}", file=sys.stderr)
        return 2
    except GeoSquadError as error:
        print(f"error: {error}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
