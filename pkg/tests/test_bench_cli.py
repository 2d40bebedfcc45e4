"""Benchmark runner reproducibility and the operator CLI surface."""

import filecmp
import json
from pathlib import Path

import pytest

from geosquad.backend import (
    BackendConfig,
    ScriptReply,
    ScriptRule,
    ScriptedBehavior,
    make_backend,
)
from geosquad.bench import any_context_overflow, run_benchmark
from geosquad.cli import main
from geosquad.config import EngineConfig, load_config, with_overrides
from geosquad.engine import build_engine
from geosquad.evaluator import parse_report_csv


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    code = main(["gen", "--seed", "7", "--per-agent", "2", "--out", str(root / "seed7")])
    assert code == 0
    return root / "seed7"


def _engine(dataset_dir, **overrides):
    config = with_overrides(
        EngineConfig(sandbox_seed=7, workers=1),
        dataset_dir=str(dataset_dir),
        **overrides,
    )
    return build_engine(config)


def test_gen_counts_and_rerun_identical(dataset_dir, tmp_path):
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    assert len(manifest["split"]["benchmark"]) == 16
    assert len(manifest["split"]["exemplar"]) == 56
    code = main(["gen", "--seed", "7", "--per-agent", "2", "--out", str(tmp_path / "again")])
    assert code == 0
    for name in ("tasks.jsonl", "golds.jsonl", "manifest.json"):
        assert filecmp.cmp(dataset_dir / name, tmp_path / "again" / name, shallow=False)


def test_run_benchmark_end_to_end_zero(dataset_dir, tmp_path):
    engine = _engine(dataset_dir)
    reports = run_benchmark(engine, ["hybrid"], out_dir=tmp_path / "out")
    assert len(reports) == 1
    report = reports[0]
    assert report.correctness_rate == 100.0
    assert all(v in (0.0, None) for v in report.epsilon_by_metric.values())
    assert report.lcc_accuracy == 100.0 and report.det_f1 == 100.0
    csv_rows = parse_report_csv((tmp_path / "out" / "report.csv").read_text())
    assert csv_rows[0]["correctness_rate_pct"] == "100.00"
    traces = list((tmp_path / "out" / "traces" / "hybrid").glob("*.json"))
    assert len(traces) == 16


def test_run_benchmark_two_strategies_two_rows(dataset_dir, tmp_path):
    engine = _engine(dataset_dir)
    reports = run_benchmark(
        engine, ["hybrid", "composition_only"], out_dir=tmp_path / "out2"
    )
    assert [r.strategy for r in reports] == ["hybrid", "composition_only"]
    rows = parse_report_csv((tmp_path / "out2" / "report.csv").read_text())
    assert len(rows) == 2


def test_benchmark_determinism_byte_identical(dataset_dir, tmp_path):
    for name in ("r1", "r2"):
        engine = _engine(dataset_dir, workers=2)
        run_benchmark(engine, ["hybrid"], out_dir=tmp_path / name)
    assert filecmp.cmp(tmp_path / "r1" / "report.csv", tmp_path / "r2" / "report.csv", shallow=False)
    first = sorted((tmp_path / "r1" / "traces" / "hybrid").glob("*.json"))
    second = sorted((tmp_path / "r2" / "traces" / "hybrid").glob("*.json"))
    assert [p.name for p in first] == [p.name for p in second]
    for a, b in zip(first, second):
        assert filecmp.cmp(a, b, shallow=False), a.name


def test_cli_bench_exit_codes(dataset_dir, tmp_path):
    # single_agent at 8 domains x 65 tools against a tight budget overflows
    code = main([
        "bench", "--dataset", str(dataset_dir), "--seed", "7",
        "--strategy", "single_agent", "--budget", "8192", "--domains", "8",
        "--out", str(tmp_path / "ofl"),
    ])
    assert code == 1
    code = main([
        "bench", "--dataset", str(dataset_dir), "--seed", "7",
        "--strategy", "single_agent", "--budget", "8192", "--domains", "8",
        "--out", str(tmp_path / "ofl2"), "--allow-failures",
    ])
    assert code == 0


def test_cli_bench_happy_path(dataset_dir, tmp_path, capsys):
    code = main([
        "bench", "--dataset", str(dataset_dir), "--seed", "7",
        "--strategy", "hybrid", "--out", str(tmp_path / "happy"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "100.00" in out
    assert (tmp_path / "happy" / "report.md").exists()


def test_domains_ablation_uses_subset(dataset_dir, tmp_path):
    config = with_overrides(
        EngineConfig(sandbox_seed=7, per_domain_tools=65),
        dataset_dir=str(dataset_dir),
        domains=("database", "dataops", "map"),
    )
    engine = build_engine(config)
    tasks = engine.benchmark_tasks()
    assert {t.domain for t in tasks} == {"database", "dataops", "map"}
    assert len(tasks) == 6
    reports = run_benchmark(engine, ["single_agent"], out_dir=None)
    assert reports[0].terminal_counts == {"completed": 6}


def test_cli_chat_crop_rotation(dataset_dir, tmp_path, capsys):
    tasks = [json.loads(line) for line in (dataset_dir / "tasks.jsonl").read_text().splitlines()]
    rotation = next(t for t in tasks if "crop rotation" in t["text"])
    code = main([
        "chat", rotation["text"], "--dataset", str(dataset_dir), "--seed", "7",
        "--out", str(tmp_path / "chat"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "terminal: completed" in out
    assert "map layers: 1" in out
    assert "clusters" in out  # final answer names the cluster payload
    assert (tmp_path / "chat" / "chat_trace.json").exists()


def test_cli_chat_empty_prompt(dataset_dir):
    assert main(["chat", "   ", "--dataset", str(dataset_dir), "--seed", "7"]) == 2


def test_cli_gen_template_gap_exit_two(tmp_path, monkeypatch, capsys):
    from geosquad import cli
    from geosquad.errors import TemplateGapError

    def explode(**kwargs):
        raise TemplateGapError("no templates for domains: vision")

    monkeypatch.setattr(cli, "generate_dataset", explode)
    code = main(["gen", "--seed", "1", "--per-agent", "1", "--out", str(tmp_path / "x")])
    assert code == 2
    assert "no templates for domains" in capsys.readouterr().err


def test_cli_chat_unknown_region_graceful(tmp_path, capsys):
    """A prompt loading a nonexistent region ends in an incomplete verdict."""
    from geosquad.core import TaskPrompt
    from geosquad.orchestrator import StrategyConfig, run_task
    from geosquad.sandbox import Sandbox
    from geosquad.toolkit import build_registry

    behavior = ScriptedBehavior(
        rules=(
            ScriptRule(
                "Request: survey atlantis vegetation",
                (ScriptReply(text="schedule = [Database(Load ndvi for atlantis)]"),),
            ),
            ScriptRule(
                "Load ndvi for atlantis",
                (
                    ScriptReply(
                        tool_calls=(
                            (
                                "load_product",
                                {"product": "ndvi", "region": "atlantis",
                                 "date_start": "2024-01", "date_end": "2024-01"},
                            ),
                        )
                    ),
                    ScriptReply(text="loaded"),
                ),
            ),
            ScriptRule(
                "List the available regions",
                (ScriptReply(tool_calls=(("list_regions", {}),)), ScriptReply(text="listed")),
            ),
        )
    )
    config = BackendConfig()
    backend = make_backend(config, behavior)
    task = TaskPrompt(id="chat", domain="database", text="survey atlantis vegetation", region="all")
    trace, _ = run_task(
        task, StrategyConfig(strategy="hybrid"), backend, config, build_registry(), Sandbox.generate(0)
    )
    assert trace.terminal == "max_revisions"
    assert "Incomplete" in trace.final_answer
    assert "atlantis" in trace.final_answer


def test_config_file_roundtrip(tmp_path, dataset_dir):
    config_path = tmp_path / "engine.toml"
    config_path.write_text(
        f"""
[backend]
kind = "scripted"
context_budget = 16384

[strategy]
kind = "composition_only"
max_revisions = 2

[dataset]
dir = "{dataset_dir}"

[sandbox]
seed = 7

[registry]
total_tools = 100

[run]
workers = 2
"""
    )
    config = load_config(config_path)
    assert config.backend.context_budget == 16384
    assert config.strategy.strategy == "composition_only"
    assert config.workers == 2
    engine = build_engine(config)
    assert engine.registry.size() == 100


def test_config_errors(tmp_path):
    from geosquad.errors import ConfigError

    bad = tmp_path / "bad.toml"
    bad.write_text("[dataset]\ndir = \"/does/not/exist\"\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    malformed = tmp_path / "malformed.toml"
    malformed.write_text("this is { not toml")
    with pytest.raises(ConfigError):
        load_config(malformed)
