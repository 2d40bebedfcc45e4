"""Domain agent toolkits: real tool specs, handlers, canonical phrases.

The phrase renderer is the single source of subprompt text for task
generation, scripted planner replies, and dependency-recovery insertions,
so all three always agree on the exact wording.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

from .core import DOMAIN_AGENTS, ToolSpec
from .registry import ToolRegistry, fill_domain_tools

AGENT_ROLES = {
    "Database": "loads data products and answers catalog queries",
    "DataOps": "filters selections and computes zonal statistics",
    "Agriculture": "vegetation analytics over NDVI and reflectance",
    "Climate": "heat and aerosol analytics over LST and AOD550",
    "Urban": "settlement analytics over built-up surface and population",
    "Forest": "canopy and tree-loss analytics",
    "Vision": "satellite scene detection and land-cover classification",
    "Map": "renders layers and annotations on the shared map",
}

AGENT_DOMAINS = {agent: domain for domain, agent in DOMAIN_AGENTS.items()}

# Tools that move or render data rather than analyze it; excluded from the
# findings digest in final answers.
SUPPORT_TOOLS = frozenset(
    {"load_product", "list_products", "list_regions", "filter_region",
     "zonal_stats", "map_add_layer", "map_snapshot"}
)

LOAD_TOOLS = frozenset({"load_product"})


def _spec(agent: str, name: str, description: str, params: Sequence[tuple[str, str, bool]]) -> ToolSpec:
    return ToolSpec(name=name, agent=agent, description=description, params=tuple(params))


def _zone_handler(products: tuple[str, ...]) -> Callable:
    def handler(session, handle, comparator, value):
        return session.threshold_zones(handle, comparator, value, products=products)

    return handler


def real_tools() -> list[tuple[ToolSpec, Callable]]:
    """The 17 domain tools backed by sandbox session handlers."""
    return [
        (
            _spec(
                "Database",
                "load_product",
                "Load a data product for a region and date range into a dataset handle",
                [("product", "product", True), ("region", "region", True),
                 ("date_start", "date", True), ("date_end", "date", True)],
            ),
            lambda s, **kw: s.load_product(**kw),
        ),
        (
            _spec("Database", "list_products", "List the catalog of available data products", []),
            lambda s, **kw: s.list_products(),
        ),
        (
            _spec("Database", "list_regions", "List the named regions available for analysis", []),
            lambda s, **kw: s.list_regions(),
        ),
        (
            _spec(
                "DataOps",
                "filter_region",
                "Restrict a dataset handle to the cells of a named region",
                [("handle", "handle", True), ("region", "region", True)],
            ),
            lambda s, **kw: s.filter_region(**kw),
        ),
        (
            _spec(
                "DataOps",
                "zonal_stats",
                "Compute a summary statistic over the cells of a dataset handle",
                [("handle", "handle", True), ("statistic", "string", True)],
            ),
            lambda s, **kw: s.zonal_stats(**kw),
        ),
        (
            _spec(
                "Agriculture",
                "low_ndvi_clusters",
                "Find connected clusters of low NDVI cells suitable for crop rotation",
                [("handle", "handle", True), ("threshold", "number", True),
                 ("min_cluster_size", "integer", True)],
            ),
            lambda s, **kw: s.low_ndvi_clusters(**kw),
        ),
        (
            _spec(
                "Agriculture",
                "reflectance_zones",
                "Flag cells whose band-2 reflectance satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("ref_b2",)),
        ),
        (
            _spec(
                "Climate",
                "heatwave_zones",
                "Flag cells whose land surface temperature satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("lst",)),
        ),
        (
            _spec(
                "Climate",
                "aod_hotspots",
                "Flag cells whose aerosol optical depth satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("aod550",)),
        ),
        (
            _spec(
                "Urban",
                "overpopulation_hotspots",
                "Flag cells whose resident count satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("population",)),
        ),
        (
            _spec(
                "Urban",
                "builtup_zones",
                "Flag cells whose built-up surface area satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("built_s",)),
        ),
        (
            _spec(
                "Forest",
                "reforestation_candidates",
                "Recommend cells with sparse canopy, optionally restricted to tree-loss cells",
                [("canopy_handle", "handle", True), ("loss_handle", "handle", True),
                 ("canopy_below", "number", True), ("require_loss", "boolean", False)],
            ),
            lambda s, **kw: s.reforestation_candidates(**kw),
        ),
        (
            _spec(
                "Forest",
                "treeloss_zones",
                "Flag cells whose tree-loss indicator satisfies a comparison",
                [("handle", "handle", True), ("comparator", "comparator", True),
                 ("value", "number", True)],
            ),
            _zone_handler(("treeloss",)),
        ),
        (
            _spec(
                "Vision",
                "detect_objects",
                "Detect objects of a class in one satellite scene",
                [("scene", "scene", True), ("object_class", "class", True)],
            ),
            lambda s, **kw: s.detect_objects(**kw),
        ),
        (
            _spec(
                "Vision",
                "classify_landcover",
                "Classify the dominant land cover of one satellite scene",
                [("scene", "scene", True)],
            ),
            lambda s, **kw: s.classify_landcover(**kw),
        ),
        (
            _spec(
                "Map",
                "map_add_layer",
                "Add the latest loaded data or analysis result to the map",
                [("source", "handle", True), ("style", "string", True)],
            ),
            lambda s, **kw: s.map_add_layer(**kw),
        ),
        (
            _spec("Map", "map_snapshot", "Return the ordered layers currently on the map", []),
            lambda s, **kw: s.map_snapshot(),
        ),
    ]


def register_domain_tools(registry: ToolRegistry, domains: Sequence[str] | None = None) -> None:
    """Register real tools for the given task domains (all eight by default)."""
    wanted_agents = None
    if domains is not None:
        wanted_agents = {DOMAIN_AGENTS[d] for d in domains}
    for spec, handler in real_tools():
        if wanted_agents is None or spec.agent in wanted_agents:
            registry.register_tool(spec, handler)


def build_registry(
    domains: Sequence[str] | None = None,
    per_domain_tools: int = 0,
    total_tools: int = 0,
    seed: int = 0,
) -> ToolRegistry:
    """Registry with real tools plus filler to a per-domain or global target."""
    registry = ToolRegistry()
    register_domain_tools(registry, domains)
    agents = registry.agents()
    if per_domain_tools:
        for agent in agents:
            fill_domain_tools(registry, agent, AGENT_DOMAINS[agent], per_domain_tools, seed)
    elif total_tools:
        base = registry.size()
        need = max(0, total_tools - base)
        share, extra = divmod(need, len(agents))
        for i, agent in enumerate(agents):
            target = len(registry.tools_for(agent)) + share + (1 if i < extra else 0)
            fill_domain_tools(registry, agent, AGENT_DOMAINS[agent], target, seed)
    return registry


# --- Canonical subprompt phrases ------------------------------------------


def _fmt_num(value) -> str:
    number = float(value)
    if number == int(number):
        return str(int(number))
    return repr(number)


def describe_call(tool_name: str, args: Mapping) -> str:
    """One canonical imperative phrase per tool call."""
    a = args
    if tool_name == "load_product":
        return (
            f"Load {a['product']} for {a['region']} "
            f"from {a['date_start']} to {a['date_end']}"
        )
    if tool_name == "list_products":
        return "List the available data products"
    if tool_name == "list_regions":
        return "List the available regions"
    if tool_name == "filter_region":
        return f"Filter the loaded data to {a['region']}"
    if tool_name == "zonal_stats":
        return f"Report the {a['statistic']} over the selection"
    if tool_name == "low_ndvi_clusters":
        return (
            f"Recommend crop rotation areas from ndvi clusters below "
            f"{_fmt_num(a['threshold'])} with at least {a['min_cluster_size']} cells"
        )
    if tool_name == "reflectance_zones":
        return f"Flag reflectance zones {a['comparator']} {_fmt_num(a['value'])}"
    if tool_name == "heatwave_zones":
        return f"Identify heatwave zones {a['comparator']} {_fmt_num(a['value'])} kelvin"
    if tool_name == "aod_hotspots":
        return f"Identify aerosol hotspots {a['comparator']} {_fmt_num(a['value'])}"
    if tool_name == "overpopulation_hotspots":
        return f"Report overpopulation hotspots {a['comparator']} {_fmt_num(a['value'])} residents"
    if tool_name == "builtup_zones":
        return f"Report built-up zones {a['comparator']} {_fmt_num(a['value'])} square meters"
    if tool_name == "reforestation_candidates":
        phrase = f"Recommend reforestation areas with canopy below {_fmt_num(a['canopy_below'])}"
        if a.get("require_loss", True):
            phrase += " on tree-loss cells"
        return phrase
    if tool_name == "treeloss_zones":
        return f"Report tree loss zones {a['comparator']} {_fmt_num(a['value'])}"
    if tool_name == "detect_objects":
        return f"Detect {a['object_class']} objects in scene {a['scene']}"
    if tool_name == "classify_landcover":
        return f"Classify land cover for scene {a['scene']}"
    if tool_name == "map_add_layer":
        return f"Plot the {a['source']} results on the map as {a['style']}"
    if tool_name == "map_snapshot":
        return "Show the current map state"
    rendered = " ".join(f"{k}={a[k]}" for k in sorted(a))
    return f"Run {tool_name} {rendered}".strip()


def subtask_phrase(calls: Sequence[tuple[str, Mapping]]) -> str:
    """Subprompt covering an agent's consecutive calls, '; '-joined."""
    return "; ".join(describe_call(name, args) for name, args in calls)


def load_phrase(product: str, region: str, date_range: tuple[str, str]) -> str:
    return describe_call(
        "load_product",
        {
            "product": product,
            "region": region,
            "date_start": date_range[0],
            "date_end": date_range[1],
        },
    )
