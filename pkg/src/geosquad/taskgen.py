"""Deterministic pseudo-dataset generator.

Each template enumerates its full parameter space, shuffles it with a
seeded RNG, and instances are drawn round-robin across a domain's
templates, so every real tool appears in the 7-per-agent exemplar split
and regeneration with the same seed is byte-identical.  Gold datapoint
sets are computed directly from fixture metadata (never by running
agents): load steps contribute region cells x covered dates, vision steps
contribute scene keys.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .backend import ChatMessage
from .core import (
    DOMAINS,
    DataPointKey,
    GoldSolution,
    GoldStep,
    TaskPrompt,
    write_jsonl,
)
from .errors import TemplateGapError
from .registry import ToolExemplar, WorkflowExemplar
from .sandbox import MONTHS_2024, REGIONS, Sandbox, region_scenes, scene_id
from .toolkit import subtask_phrase

EXEMPLARS_PER_AGENT = 7
DEFAULT_PER_AGENT = 25
FULL_PER_AGENT = 250

_REGION_NAMES = tuple(sorted(REGIONS))
_MODIS_PRODUCTS = ("ndvi", "ref_b2", "lst", "aod550")
_ANNUAL_PRODUCTS = ("built_s", "population", "canopy", "treeloss")
_OBJECT_CLASSES = ("airplane", "ship", "vehicle", "storage_tank")
_VISION_SOURCES = ("xView1", "xView2", "FAIR1M", "fMoW", "xView3", "SARFish")
_STATISTICS = ("mean", "min", "max", "sum")


@dataclass(frozen=True)
class TaskTemplate:
    """A parametric task: text surface plus a gold-step recipe."""

    name: str
    domain: str
    space: Callable[[], list[dict]]
    render: Callable[[dict], str]
    recipe: Callable[[dict], list[GoldStep]]
    date_range: Callable[[dict], tuple[str, str] | None] = lambda p: None


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    per_agent_count: int
    counts: Mapping[str, int]
    split: Mapping[str, tuple[str, ...]]
    fixture_hash: str

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "per_agent_count": self.per_agent_count,
            "counts": dict(self.counts),
            "split": {k: list(v) for k, v in self.split.items()},
            "fixture_hash": self.fixture_hash,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DatasetManifest":
        return cls(
            seed=d["seed"],
            per_agent_count=d["per_agent_count"],
            counts=dict(d["counts"]),
            split={k: tuple(v) for k, v in d["split"].items()},
            fixture_hash=d["fixture_hash"],
        )


def _month_pairs() -> list[tuple[str, str]]:
    return [
        (MONTHS_2024[i], MONTHS_2024[j])
        for i in range(len(MONTHS_2024))
        for j in range(i, len(MONTHS_2024))
    ]


def _load(product: str, region: str, d0: str, d1: str) -> GoldStep:
    return GoldStep(
        "Database",
        "load_product",
        {"product": product, "region": region, "date_start": d0, "date_end": d1},
    )


def _zone(agent: str, tool: str, value, comparator: str = ">") -> GoldStep:
    return GoldStep(agent, tool, {"handle": "latest", "comparator": comparator, "value": value})


def _plot(source: str, style: str) -> GoldStep:
    return GoldStep("Map", "map_add_layer", {"source": source, "style": style})


def default_templates() -> list[TaskTemplate]:
    templates: list[TaskTemplate] = []

    # -- database --
    def db_load_space():
        out = []
        for product in _MODIS_PRODUCTS:
            for d0, d1 in _month_pairs():
                for region in _REGION_NAMES:
                    out.append({"product": product, "region": region, "d0": d0, "d1": d1})
        for product in _ANNUAL_PRODUCTS:
            for region in _REGION_NAMES:
                out.append({"product": product, "region": region, "d0": "2020", "d1": "2020"})
        return out

    templates.append(
        TaskTemplate(
            name="db_load",
            domain="database",
            space=db_load_space,
            render=lambda p: (
                f"Load the {p['product']} product for {p['region']} "
                f"covering {p['d0']} to {p['d1']}."
            ),
            recipe=lambda p: [_load(p["product"], p["region"], p["d0"], p["d1"])],
            date_range=lambda p: (p["d0"], p["d1"]),
        )
    )
    templates.append(
        TaskTemplate(
            name="db_catalog",
            domain="database",
            space=lambda: [
                {"region": r, "d0": m} for r in _REGION_NAMES for m in MONTHS_2024
            ],
            render=lambda p: (
                f"Before the {p['region']} study starting {p['d0']}, "
                f"list the available data products."
            ),
            recipe=lambda p: [GoldStep("Database", "list_products", {})],
        )
    )
    templates.append(
        TaskTemplate(
            name="db_regions",
            domain="database",
            space=lambda: [
                {"region": r, "d0": m} for r in _REGION_NAMES for m in MONTHS_2024
            ],
            render=lambda p: (
                f"Confirm {p['region']} is among the available analysis "
                f"regions for the {p['d0']} campaign."
            ),
            recipe=lambda p: [GoldStep("Database", "list_regions", {})],
        )
    )

    # -- dataops --
    def do_stats_space():
        return [
            {"product": product, "region": region, "d0": d0, "d1": d1, "stat": stat}
            for product in _MODIS_PRODUCTS
            for region in _REGION_NAMES
            for (d0, d1) in _month_pairs()[::7]
            for stat in _STATISTICS
        ]

    templates.append(
        TaskTemplate(
            name="do_stats",
            domain="dataops",
            space=do_stats_space,
            render=lambda p: (
                f"Load {p['product']} for {p['region']} from {p['d0']} to "
                f"{p['d1']} and report the {p['stat']} value."
            ),
            recipe=lambda p: [
                _load(p["product"], p["region"], p["d0"], p["d1"]),
                GoldStep("DataOps", "zonal_stats", {"handle": "latest", "statistic": p["stat"]}),
            ],
            date_range=lambda p: (p["d0"], p["d1"]),
        )
    )
    templates.append(
        TaskTemplate(
            name="do_filter",
            domain="dataops",
            space=lambda: [
                {"product": product, "region": region, "d0": m, "stat": stat}
                for product in _MODIS_PRODUCTS
                for region in _REGION_NAMES
                for m in MONTHS_2024
                for stat in _STATISTICS
            ],
            render=lambda p: (
                f"Load {p['product']} across all regions for {p['d0']}, narrow "
                f"the analysis to {p['region']} and report the {p['stat']}."
            ),
            recipe=lambda p: [
                _load(p["product"], "all", p["d0"], p["d0"]),
                GoldStep("DataOps", "filter_region", {"handle": "latest", "region": p["region"]}),
                GoldStep("DataOps", "zonal_stats", {"handle": "latest", "statistic": p["stat"]}),
            ],
            date_range=lambda p: (p["d0"], p["d0"]),
        )
    )

    # -- map --
    templates.append(
        TaskTemplate(
            name="map_plot",
            domain="map",
            space=lambda: [
                {"product": product, "region": region, "d0": m}
                for product in _MODIS_PRODUCTS
                for region in _REGION_NAMES
                for m in MONTHS_2024
            ],
            render=lambda p: (
                f"Load {p['product']} for {p['region']} at {p['d0']} and "
                f"plot it on the map."
            ),
            recipe=lambda p: [
                _load(p["product"], p["region"], p["d0"], p["d0"]),
                _plot("latest", "raster"),
            ],
            date_range=lambda p: (p["d0"], p["d0"]),
        )
    )
    templates.append(
        TaskTemplate(
            name="map_state",
            domain="map",
            space=lambda: [
                {"product": product, "region": region, "d0": d0, "d1": d1}
                for product in _MODIS_PRODUCTS
                for region in _REGION_NAMES
                for (d0, d1) in _month_pairs()[::11]
            ],
            render=lambda p: (
                f"Plot {p['product']} for {p['region']} from {p['d0']} to "
                f"{p['d1']} on the map and show the current map state."
            ),
            recipe=lambda p: [
                _load(p["product"], p["region"], p["d0"], p["d1"]),
                _plot("latest", "raster"),
                GoldStep("Map", "map_snapshot", {}),
            ],
            date_range=lambda p: (p["d0"], p["d1"]),
        )
    )

    # -- agriculture --
    templates.append(
        TaskTemplate(
            name="agr_rotation",
            domain="agriculture",
            space=lambda: [
                {"region": region, "thr": thr, "msize": msize}
                for region in _REGION_NAMES
                for thr in (0.2, 0.25, 0.3, 0.35)
                for msize in (2, 3)
            ],
            render=lambda p: (
                f"From NDVI, recommend crop rotation areas in {p['region']} "
                f"using a {p['thr']} vegetation threshold and plot them on the map."
            ),
            recipe=lambda p: [
                _load("ndvi", p["region"], "2024-01", "2024-12"),
                GoldStep("DataOps", "filter_region", {"handle": "latest", "region": p["region"]}),
                GoldStep(
                    "Agriculture",
                    "low_ndvi_clusters",
                    {"handle": "latest", "threshold": p["thr"], "min_cluster_size": p["msize"]},
                ),
                _plot("analysis", "highlight"),
            ],
            date_range=lambda p: ("2024-01", "2024-12"),
        )
    )
    templates.append(
        TaskTemplate(
            name="agr_reflectance",
            domain="agriculture",
            space=lambda: [
                {"region": region, "value": value, "d0": m}
                for region in _REGION_NAMES
                for value in (0.3, 0.4, 0.5, 0.6)
                for m in MONTHS_2024
            ],
            render=lambda p: (
                f"From Ref B2, flag reflectance zones above {p['value']} in "
                f"{p['region']} for {p['d0']}."
            ),
            recipe=lambda p: [
                _load("ref_b2", p["region"], p["d0"], p["d0"]),
                _zone("Agriculture", "reflectance_zones", p["value"]),
            ],
            date_range=lambda p: (p["d0"], p["d0"]),
        )
    )

    # -- climate --
    templates.append(
        TaskTemplate(
            name="cli_heat",
            domain="climate",
            space=lambda: [
                {"region": region, "value": value, "d0": d0, "d1": d1}
                for region in _REGION_NAMES
                for value in (300, 303, 305, 308)
                for (d0, d1) in _month_pairs()[::13]
            ],
            render=lambda p: (
                f"From LST, identify dangerous heatwave regions in {p['region']} "
                f"above {p['value']} kelvin between {p['d0']} and {p['d1']}."
            ),
            recipe=lambda p: [
                _load("lst", p["region"], p["d0"], p["d1"]),
                _zone("Climate", "heatwave_zones", p["value"]),
            ],
            date_range=lambda p: (p["d0"], p["d1"]),
        )
    )
    templates.append(
        TaskTemplate(
            name="cli_aod",
            domain="climate",
            space=lambda: [
                {"region": region, "value": value, "d0": m}
                for region in _REGION_NAMES
                for value in (0.8, 1.0, 1.2)
                for m in MONTHS_2024
            ],
            render=lambda p: (
                f"From AOD550, locate aerosol hotspots beyond {p['value']} in "
                f"{p['region']} during {p['d0']} and plot them on the map."
            ),
            recipe=lambda p: [
                _load("aod550", p["region"], p["d0"], p["d0"]),
                _zone("Climate", "aod_hotspots", p["value"]),
                _plot("analysis", "heat"),
            ],
            date_range=lambda p: (p["d0"], p["d0"]),
        )
    )

    # -- urban --
    templates.append(
        TaskTemplate(
            name="urb_pop",
            domain="urban",
            space=lambda: [
                {"region": region, "value": value}
                for region in _REGION_NAMES
                for value in range(12000, 30500, 500)
            ],
            render=lambda p: (
                f"From 2020 pop., report overpopulation hotspots for "
                f"{p['region']} beyond {p['value']} residents."
            ),
            recipe=lambda p: [
                _load("population", p["region"], "2020", "2020"),
                _zone("Urban", "overpopulation_hotspots", p["value"]),
            ],
            date_range=lambda p: ("2020", "2020"),
        )
    )
    templates.append(
        TaskTemplate(
            name="urb_built",
            domain="urban",
            space=lambda: [
                {"region": region, "value": value}
                for region in _REGION_NAMES
                for value in range(500000, 810000, 10000)
            ],
            render=lambda p: (
                f"From GHS built-up, map zones of {p['region']} with more than "
                f"{p['value']} square meters built surface in 2020."
            ),
            recipe=lambda p: [
                _load("built_s", p["region"], "2020", "2020"),
                _zone("Urban", "builtup_zones", p["value"]),
                _plot("analysis", "zones"),
            ],
            date_range=lambda p: ("2020", "2020"),
        )
    )

    # -- forestry --
    templates.append(
        TaskTemplate(
            name="for_refo",
            domain="forestry",
            space=lambda: [
                {"region": region, "value": value}
                for region in _REGION_NAMES
                for value in range(10, 46)
            ],
            render=lambda p: (
                f"From 2020 canopy, recommend reforestation areas in "
                f"{p['region']} with canopy below {p['value']} percent and plot them."
            ),
            recipe=lambda p: [
                _load("canopy", p["region"], "2020", "2020"),
                _load("treeloss", p["region"], "2020", "2020"),
                GoldStep(
                    "Forest",
                    "reforestation_candidates",
                    {
                        "canopy_handle": "latest",
                        "loss_handle": "latest",
                        "canopy_below": p["value"],
                        "require_loss": True,
                    },
                ),
                _plot("analysis", "forest"),
            ],
            date_range=lambda p: ("2020", "2020"),
        )
    )
    templates.append(
        TaskTemplate(
            name="for_loss",
            domain="forestry",
            space=lambda: [
                {"region": region, "stat": stat}
                for region in _REGION_NAMES
                for stat in _STATISTICS
            ],
            render=lambda p: (
                f"Report 2020 tree loss zones in {p['region']} along with the "
                f"{p['stat']} loss indicator."
            ),
            recipe=lambda p: [
                _load("treeloss", p["region"], "2020", "2020"),
                _zone("Forest", "treeloss_zones", 0),
                GoldStep("DataOps", "zonal_stats", {"handle": "latest", "statistic": p["stat"]}),
            ],
            date_range=lambda p: ("2020", "2020"),
        )
    )

    # -- vision --
    def _detect_steps(p: dict) -> list[GoldStep]:
        steps = [
            GoldStep(
                "Vision",
                "detect_objects",
                {"scene": scene_id(r, c), "object_class": p["cls"]},
            )
            for r, c in region_scenes(p["region"])
        ]
        steps.append(_plot("analysis", "boxes"))
        return steps

    templates.append(
        TaskTemplate(
            name="vis_detect",
            domain="vision",
            space=lambda: [
                {"src": src, "cls": cls, "region": region}
                for src in _VISION_SOURCES
                for cls in _OBJECT_CLASSES
                for region in _REGION_NAMES
            ],
            render=lambda p: (
                f"From {p['src']}, detect and plot {p['cls']}s in {p['region']}."
            ),
            recipe=_detect_steps,
        )
    )

    def _lcc_steps(p: dict) -> list[GoldStep]:
        scenes = region_scenes(p["region"])
        r, c = scenes[p["k"] % len(scenes)]
        return [GoldStep("Vision", "classify_landcover", {"scene": scene_id(r, c)})]

    templates.append(
        TaskTemplate(
            name="vis_lcc",
            domain="vision",
            space=lambda: [
                {"src": src, "region": region, "k": k}
                for src in _VISION_SOURCES
                for region in _REGION_NAMES
                for k in range(4)
            ],
            render=lambda p: (
                f"From {p['src']}, classify the dominant land cover of scene "
                f"{p['k']} in {p['region']}."
            ),
            recipe=_lcc_steps,
        )
    )
    return templates


# --- Gold datapoint computation ------------------------------------------


def gold_datapoints_for_steps(
    steps: Sequence[GoldStep], fixture_meta: Mapping
) -> frozenset[DataPointKey]:
    """Direct computation over fixture metadata; no tool handler runs."""
    regions = {
        name: [tuple(c) for c in cells]
        for name, cells in fixture_meta["regions"].items()
    }
    products = fixture_meta["products"]
    grid_size = fixture_meta["grid_size"]
    keys: set[DataPointKey] = set()
    for step in steps:
        args = step.canonical_args
        if step.tool_name == "load_product":
            product = args["product"]
            info = products[product]
            dates = info["dates"]
            i = dates.index(args["date_start"])
            j = dates.index(args["date_end"])
            region = args["region"]
            if product in ("detection", "lcc"):
                cells = [
                    tuple(c) for c in fixture_meta["scene_regions"][region]
                ] if region != "all" else [
                    (r, c)
                    for r in range(fixture_meta["scene_grid"])
                    for c in range(fixture_meta["scene_grid"])
                ]
            elif region == "all":
                cells = [(r, c) for r in range(grid_size) for c in range(grid_size)]
            else:
                cells = regions[region]
            for cell in cells:
                for date in dates[i : j + 1]:
                    keys.add(DataPointKey(product, cell, date))
        elif step.tool_name == "detect_objects":
            row, col = _scene_cell(args["scene"])
            keys.add(DataPointKey("detection", (row, col), products["detection"]["dates"][0]))
        elif step.tool_name == "classify_landcover":
            row, col = _scene_cell(args["scene"])
            keys.add(DataPointKey("lcc", (row, col), products["lcc"]["dates"][0]))
    return frozenset(keys)


def _scene_cell(sid: str) -> tuple[int, int]:
    body = sid.strip().lower().lstrip("s")
    row, col = body.split("_")
    return int(row), int(col)


# --- Dataset generation ------------------------------------------------------


def generate_dataset(
    templates: Sequence[TaskTemplate] | None = None,
    seed: int = 0,
    per_agent_count: int = DEFAULT_PER_AGENT,
    sandbox: Sandbox | None = None,
) -> tuple[list[TaskPrompt], list[GoldSolution], DatasetManifest]:
    """Instantiate 7 exemplars + per_agent_count benchmark tasks per domain."""
    templates = list(templates) if templates is not None else default_templates()
    sandbox = sandbox or Sandbox.generate(seed)
    meta = sandbox.fixture_metadata()

    by_domain: dict[str, list[TaskTemplate]] = {}
    for template in templates:
        by_domain.setdefault(template.domain, []).append(template)
    gaps = [d for d in DOMAINS if d not in by_domain]
    if gaps:
        raise TemplateGapError(f"no templates for domains: {', '.join(gaps)}")

    tasks: list[TaskPrompt] = []
    golds: list[GoldSolution] = []
    split: dict[str, list[str]] = {"exemplar": [], "benchmark": []}
    counts: dict[str, int] = {}
    seen_texts: set[str] = set()

    for domain in DOMAINS:
        domain_templates = by_domain[domain]
        streams: list[list[dict]] = []
        for template in domain_templates:
            space = template.space()
            rng = random.Random(f"taskgen:{seed}:{domain}:{template.name}")
            rng.shuffle(space)
            streams.append(space)

        need = EXEMPLARS_PER_AGENT + per_agent_count
        picks: list[tuple[TaskTemplate, dict, str]] = []
        t_count = len(domain_templates)
        cursor = [0] * t_count
        t_index = 0
        exhausted_streak = 0
        while len(picks) < need:
            if exhausted_streak >= t_count:
                raise TemplateGapError(
                    f"domain {domain}: parameter space exhausted at "
                    f"{len(picks)}/{need} unique tasks"
                )
            slot = t_index % t_count
            t_index += 1
            template, stream = domain_templates[slot], streams[slot]
            if cursor[slot] >= len(stream):
                exhausted_streak += 1
                continue
            params = stream[cursor[slot]]
            cursor[slot] += 1
            exhausted_streak = 0
            text = template.render(params)
            if text in seen_texts:
                # retry the same slot so round-robin template coverage of
                # the exemplar split survives collisions
                t_index -= 1
                continue
            seen_texts.add(text)
            picks.append((template, params, text))

        for i, (template, params, text) in enumerate(picks):
            exemplar = i < EXEMPLARS_PER_AGENT
            task_id = (
                f"ex_{domain}_{i:02d}" if exemplar else f"t_{domain}_{i - EXEMPLARS_PER_AGENT:04d}"
            )
            steps = tuple(template.recipe(params))
            task = TaskPrompt(
                id=task_id,
                domain=domain,
                text=text,
                region=params.get("region", "all"),
                date_range=template.date_range(params),
            )
            gold = GoldSolution(
                task_id=task_id,
                steps=steps,
                gold_datapoints=gold_datapoints_for_steps(steps, meta),
            )
            tasks.append(task)
            golds.append(gold)
            split["exemplar" if exemplar else "benchmark"].append(task_id)
        counts[domain] = need

    manifest = DatasetManifest(
        seed=seed,
        per_agent_count=per_agent_count,
        counts=counts,
        split={k: tuple(v) for k, v in split.items()},
        fixture_hash=sandbox.fixture_hash(),
    )
    return tasks, golds, manifest


# --- Memory compilation --------------------------------------------------------


def group_steps_by_agent(steps: Sequence[GoldStep]) -> list[tuple[str, list[GoldStep]]]:
    """Consecutive runs of the same agent, in execution order."""
    groups: list[tuple[str, list[GoldStep]]] = []
    for step in steps:
        if groups and groups[-1][0] == step.agent_name:
            groups[-1][1].append(step)
        else:
            groups.append((step.agent_name, [step]))
    return groups


def schedule_sketch(steps: Sequence[GoldStep]) -> list[tuple[str, str]]:
    return [
        (agent, subtask_phrase([(s.tool_name, s.canonical_args) for s in group]))
        for agent, group in group_steps_by_agent(steps)
    ]


def compile_memories(
    exemplar_tasks: Sequence[TaskPrompt], exemplar_golds: Sequence[GoldSolution]
) -> tuple[list[ToolExemplar], list[WorkflowExemplar]]:
    """One ToolExemplar per (exemplar, agent); one WorkflowExemplar each."""
    golds_by_id = {g.task_id: g for g in exemplar_golds}
    ts_store: list[ToolExemplar] = []
    wm_store: list[WorkflowExemplar] = []
    for task in exemplar_tasks:
        gold = golds_by_id[task.id]
        agent_tools: dict[str, list[str]] = {}
        for step in gold.steps:
            agent_tools.setdefault(step.agent_name, [])
            if step.tool_name not in agent_tools[step.agent_name]:
                agent_tools[step.agent_name].append(step.tool_name)
        for agent, tools in agent_tools.items():
            ts_store.append(
                ToolExemplar(prompt_text=task.text, agent=agent, tools_used=tuple(tools))
            )
        agents_involved = tuple(agent for agent, _ in group_steps_by_agent(gold.steps))
        wm_store.append(
            WorkflowExemplar(
                prompt_text=task.text,
                agents_involved=agents_involved,
                schedule_sketch=tuple(schedule_sketch(gold.steps)),
            )
        )
    return ts_store, wm_store


# --- Paraphrase hook ---------------------------------------------------------


def paraphrase_hook(text: str, backend=None, config=None, enabled: bool = False) -> str:
    """Optional surface-form variation; identity unless explicitly enabled."""
    if not enabled or backend is None or config is None:
        return text
    messages = [
        ChatMessage(
            role="system",
            content="Paraphrase the user's request. Keep every region, date, "
            "product and number unchanged. Reply with the paraphrase only.",
        ),
        ChatMessage(role="user", content=text),
    ]
    reply, _usage = backend.complete(messages, [], config)
    return reply.content.strip() or text


# --- Dataset directory IO ------------------------------------------------------


def write_dataset(
    directory: str | Path,
    tasks: Sequence[TaskPrompt],
    golds: Sequence[GoldSolution],
    manifest: DatasetManifest,
    sandbox: Sandbox,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_jsonl(directory / "tasks.jsonl", (t.to_dict() for t in tasks))
    write_jsonl(directory / "golds.jsonl", (g.to_dict() for g in golds))
    (directory / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), indent=1, sort_keys=True), encoding="utf-8"
    )
    (directory / "fixture.json").write_text(
        json.dumps(sandbox.fixture_metadata(), indent=1, sort_keys=True), encoding="utf-8"
    )
    exemplar_ids = set(manifest.split["exemplar"])
    exemplar_tasks = [t for t in tasks if t.id in exemplar_ids]
    exemplar_golds = [g for g in golds if g.task_id in exemplar_ids]
    ts_store, wm_store = compile_memories(exemplar_tasks, exemplar_golds)
    write_jsonl(directory / "ts_store.jsonl", (e.to_dict() for e in ts_store))
    write_jsonl(directory / "wm_store.jsonl", (e.to_dict() for e in wm_store))
    return directory
