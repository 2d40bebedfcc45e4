"""Sandbox generation, handlers, recorder soundness, cluster oracle."""

import hashlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geosquad.core import DataPointKey
from geosquad.errors import (
    DateOutOfRange,
    MissingProduct,
    UnknownRegion,
    UnknownScene,
    WrongProduct,
)
from geosquad.evaluator import match_boxes
from geosquad.sandbox import (
    GRID_SIZE,
    MONTHS_2024,
    REGIONS,
    RasterProduct,
    Sandbox,
    SandboxSession,
    VALUE_RANGES,
    VisionConfig,
    _unit_hash,
    find_clusters,
    generate_raster,
    region_cells,
    region_scenes,
)

BRISBANE_CELLS = len(REGIONS["brisbane"])
BUNDABERG_CELLS = len(REGIONS["bundaberg"])


# --- generation ---------------------------------------------------------------


def test_generation_deterministic_golden_hash():
    a = generate_raster("ndvi", seed=0)
    b = generate_raster("ndvi", seed=0)
    ha = hashlib.sha256(a.grid.tobytes()).hexdigest()
    hb = hashlib.sha256(b.grid.tobytes()).hexdigest()
    assert ha == hb
    assert generate_raster("ndvi", seed=1).grid.tobytes() != a.grid.tobytes()


def test_sandbox_generate_deterministic():
    assert Sandbox.generate(3).fixture_hash() == Sandbox.generate(3).fixture_hash()
    assert Sandbox.generate(3).fixture_hash() != Sandbox.generate(4).fixture_hash()


@pytest.mark.parametrize("product", sorted(VALUE_RANGES))
def test_value_ranges_hold_over_seeds(product):
    lo, hi = VALUE_RANGES[product]
    for seed in range(100):
        grid = generate_raster(product, seed).grid
        assert grid.min() >= lo and grid.max() <= hi


def test_value_ranges_hold_after_motifs():
    for seed in (0, 5, 11):
        sandbox = Sandbox.generate(seed)
        for product, (lo, hi) in VALUE_RANGES.items():
            grid = sandbox.products[product].grid
            assert grid.min() >= lo and grid.max() <= hi


def test_motifs_exported_and_planted():
    sandbox = Sandbox.generate(2)
    cells = sandbox.motifs["ndvi"]["brisbane"]
    assert len(cells) == 4
    for r, c in cells:
        assert sandbox.products["ndvi"].grid[r, c] == pytest.approx(0.05)
        assert (r, c) in REGIONS["brisbane"]


# --- load / filter ----------------------------------------------------------------


@pytest.fixture(scope="module")
def sandbox():
    return Sandbox.generate(0)


def test_load_records_region_times_months(sandbox):
    session = SandboxSession(sandbox)
    out = session.load_product("ndvi", "brisbane", "2024-01", "2024-12")
    assert out["cells"] == BRISBANE_CELLS
    assert len(session.recorder.accessed) == BRISBANE_CELLS * 12
    sample = DataPointKey("ndvi", min(REGIONS["brisbane"]), "2024-01")
    assert sample in session.recorder.accessed


def test_load_unknown_region(sandbox):
    session = SandboxSession(sandbox)
    with pytest.raises(UnknownRegion):
        session.load_product("ndvi", "atlantis", "2024-01", "2024-01")


def test_load_single_month_lst(sandbox):
    session = SandboxSession(sandbox)
    out = session.load_product("lst", "bundaberg", "2024-06", "2024-06")
    assert out["cells"] == BUNDABERG_CELLS
    assert len(session.recorder.accessed) == BUNDABERG_CELLS


def test_load_date_out_of_range(sandbox):
    session = SandboxSession(sandbox)
    with pytest.raises(DateOutOfRange):
        session.load_product("ndvi", "brisbane", "2023-01", "2024-01")
    with pytest.raises(DateOutOfRange):
        session.load_product("canopy", "brisbane", "2021", "2021")


def test_filter_full_grid_to_region(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "all", "2024-01", "2024-01")
    out = session.filter_region("latest", "brisbane")
    assert out["cells"] == BRISBANE_CELLS


def test_filter_own_region_identity(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    out = session.filter_region("latest", "brisbane")
    assert out["cells"] == BRISBANE_CELLS


def test_filter_disjoint_region_empty_not_error(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    out = session.filter_region("latest", "melbourne")
    assert out["cells"] == 0


def test_filter_records_nothing_new(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    before = session.recorder.mark()
    session.filter_region("latest", "brisbane")
    assert session.recorder.since(before) == frozenset()


def test_resolve_latest_missing_product(sandbox):
    session = SandboxSession(sandbox)
    with pytest.raises(MissingProduct):
        session.resolve_handle("latest", products=("ndvi",))
    session.load_product("lst", "brisbane", "2024-01", "2024-01")
    with pytest.raises(MissingProduct):
        session.resolve_handle("latest", products=("ndvi",))
    handle = session.resolve_handle("latest", products=("lst",))
    assert handle.product == "lst"


# --- clusters ---------------------------------------------------------------------


def _uniform_sandbox(value, product="ndvi", size=8):
    grid = np.full((size, size), value)
    products = {product: RasterProduct(product, grid, MONTHS_2024)}
    return Sandbox(products, {}, seed=0)


def test_clusters_nothing_below_threshold():
    sandbox = _uniform_sandbox(0.8)
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "all", "2024-01", "2024-01")
    out = session.low_ndvi_clusters("latest", threshold=0.3, min_cluster_size=1)
    assert out["clusters"] == []


def test_clusters_planted_l_shape():
    grid = np.full((8, 8), 0.8)
    for r, c in [(2, 2), (3, 2), (3, 3)]:
        grid[r, c] = 0.1
    sandbox = Sandbox({"ndvi": RasterProduct("ndvi", grid, MONTHS_2024)}, {}, seed=0)
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "all", "2024-01", "2024-01")
    out = session.low_ndvi_clusters("latest", threshold=0.3, min_cluster_size=2)
    assert out["clusters"] == [[[2, 2], [3, 2], [3, 3]]]
    out = session.low_ndvi_clusters("latest", threshold=0.3, min_cluster_size=4)
    assert out["clusters"] == []


def test_clusters_wrong_product():
    sandbox = _uniform_sandbox(290.0, product="lst")
    session = SandboxSession(sandbox)
    session.load_product("lst", "all", "2024-01", "2024-01")
    # explicit handle of the wrong product -> WrongProduct; an unresolved
    # "latest" would instead raise MissingProduct (the dependency path)
    with pytest.raises(WrongProduct):
        session.low_ndvi_clusters("h1", threshold=0.3, min_cluster_size=1)
    with pytest.raises(MissingProduct):
        session.low_ndvi_clusters("latest", threshold=0.3, min_cluster_size=1)


def brute_force_clusters(values, threshold, min_size):
    """Independent flood fill used as the clustering oracle."""
    low = {c for c, v in values.items() if v < threshold}
    seen = set()
    clusters = []
    for start in sorted(low):
        if start in seen:
            continue
        frontier = [start]
        component = set()
        while frontier:
            cell = frontier.pop()
            if cell in component or cell not in low:
                continue
            component.add(cell)
            r, c = cell
            frontier.extend([(r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)])
        seen |= component
        if len(component) >= min_size:
            clusters.append(sorted(component))
    clusters.sort(key=lambda comp: (-len(comp), min(comp)))
    return clusters


@settings(max_examples=60, deadline=None)
@given(
    data=st.data(),
    size=st.integers(3, 20),
    threshold=st.floats(0.1, 0.9),
    min_size=st.integers(1, 4),
)
def test_cluster_oracle_agreement(data, size, threshold, min_size):
    values = data.draw(
        st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=size * size, max_size=size * size
        )
    )
    grid_values = {
        (r, c): values[r * size + c] for r in range(size) for c in range(size)
    }
    cells = list(grid_values)
    ours = find_clusters(cells, grid_values, threshold, min_size)
    oracle = brute_force_clusters(grid_values, threshold, min_size)
    assert ours == oracle


# --- threshold zones -----------------------------------------------------------------


def test_threshold_zones_empty():
    sandbox = _uniform_sandbox(290.0, product="lst")
    session = SandboxSession(sandbox)
    session.load_product("lst", "all", "2024-01", "2024-01")
    out = session.threshold_zones("latest", ">", 300.0)
    assert out["cells"] == []


def test_threshold_zones_planted_hot_cells():
    grid = np.full((8, 8), 290.0)
    hot = [(1, 1), (1, 2), (5, 5)]
    for r, c in hot:
        grid[r, c] = 310.0
    sandbox = Sandbox({"lst": RasterProduct("lst", grid, MONTHS_2024)}, {}, seed=0)
    session = SandboxSession(sandbox)
    session.load_product("lst", "all", "2024-01", "2024-01")
    out = session.threshold_zones("latest", ">", 305.0)
    assert sorted(map(tuple, out["cells"])) == sorted(hot)


def test_threshold_zones_le_max_is_everything():
    sandbox = _uniform_sandbox(290.0, product="lst")
    session = SandboxSession(sandbox)
    session.load_product("lst", "all", "2024-01", "2024-01")
    out = session.threshold_zones("latest", "<=", 290.0)
    assert len(out["cells"]) == 64


def test_threshold_comparator_unicode_accepted():
    sandbox = _uniform_sandbox(290.0, product="lst")
    session = SandboxSession(sandbox)
    session.load_product("lst", "all", "2024-01", "2024-01")
    assert len(session.threshold_zones("latest", "≥", 290.0)["cells"]) == 64


# --- reforestation --------------------------------------------------------------------


def _forest_sandbox(canopy_value=90.0, planted=None):
    canopy = np.full((8, 8), canopy_value)
    loss = np.zeros((8, 8))
    for (r, c), (cv, lv) in (planted or {}).items():
        canopy[r, c] = cv
        loss[r, c] = lv
    products = {
        "canopy": RasterProduct("canopy", canopy, ("2020",)),
        "treeloss": RasterProduct("treeloss", loss, ("2020",)),
    }
    return Sandbox(products, {}, seed=0)


def _load_forest(session):
    session.load_product("canopy", "all", "2020", "2020")
    session.load_product("treeloss", "all", "2020", "2020")


def test_reforestation_empty_when_canopy_high():
    session = SandboxSession(_forest_sandbox())
    _load_forest(session)
    out = session.reforestation_candidates("h1", "h2", canopy_below=30, require_loss=True)
    assert out["cells"] == []


def test_reforestation_planted_cell():
    session = SandboxSession(
        _forest_sandbox(planted={(2, 3): (10.0, 1.0), (4, 4): (10.0, 0.0)})
    )
    _load_forest(session)
    out = session.reforestation_candidates("h1", "h2", canopy_below=30, require_loss=True)
    assert out["cells"] == [[2, 3]]


def test_reforestation_without_loss_is_superset():
    session = SandboxSession(
        _forest_sandbox(planted={(2, 3): (10.0, 1.0), (4, 4): (10.0, 0.0)})
    )
    _load_forest(session)
    strict = session.reforestation_candidates("h1", "h2", canopy_below=30, require_loss=True)
    loose = session.reforestation_candidates("h1", "h2", canopy_below=30, require_loss=False)
    assert set(map(tuple, strict["cells"])) <= set(map(tuple, loose["cells"]))
    assert sorted(map(tuple, loose["cells"])) == [(2, 3), (4, 4)]


def test_reforestation_wrong_product():
    session = SandboxSession(_forest_sandbox())
    _load_forest(session)
    with pytest.raises(WrongProduct):
        session.reforestation_candidates("h2", "h2", canopy_below=30)


# --- vision -------------------------------------------------------------------------


def test_detect_objects_perfect_stub():
    sandbox = Sandbox.generate(0)
    session = SandboxSession(sandbox)
    annotation = sandbox.annotations["s0_0"]
    cls = annotation.objects[0][0]
    truth = [box for c, box in annotation.objects if c == cls]
    out = session.detect_objects("s0_0", cls)
    assert len(out["boxes"]) == len(truth)
    tp, fp, fn = match_boxes(out["boxes"], truth)
    assert (fp, fn) == (0, 0)
    assert DataPointKey("detection", (0, 0), "2024") in session.recorder.accessed


def test_detect_objects_recall_half_deterministic_subset():
    sandbox = Sandbox.generate(0, vision=VisionConfig(detection_recall=0.5))
    session = SandboxSession(sandbox)
    annotation = sandbox.annotations["s1_1"]
    cls = annotation.objects[0][0]
    truth = [box for c, box in annotation.objects if c == cls]
    expected = [
        box
        for i, box in enumerate(truth)
        if _unit_hash("det", 0, "s1_1", i) < 0.5
    ]
    out = session.detect_objects("s1_1", cls)
    assert [tuple(b) for b in out["boxes"]] == [tuple(b) for b in expected]
    again = SandboxSession(sandbox).detect_objects("s1_1", cls)
    assert again["boxes"] == out["boxes"]


def test_detect_unknown_scene():
    session = SandboxSession(Sandbox.generate(0))
    with pytest.raises(UnknownScene):
        session.detect_objects("s9_9", "airplane")
    with pytest.raises(UnknownScene):
        session.detect_objects("nonsense", "airplane")


def test_classify_landcover_perfect_and_confused():
    sandbox = Sandbox.generate(0)
    session = SandboxSession(sandbox)
    out = session.classify_landcover("s2_2")
    assert out["landcover"] == sandbox.annotations["s2_2"].landcover
    confused = Sandbox.generate(0, vision=VisionConfig(lcc_accuracy=0.0))
    out2 = SandboxSession(confused).classify_landcover("s2_2")
    assert out2["landcover"] != sandbox.annotations["s2_2"].landcover


# --- map ---------------------------------------------------------------------------


def test_map_add_then_snapshot(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-02")
    session.map_add_layer("latest", "raster")
    snap = session.map_snapshot()
    assert len(snap["layers"]) == 1
    assert snap["layers"][0]["product"] == "ndvi"
    assert snap["layers"][0]["region"] == "brisbane"


def test_map_two_adds_preserve_order(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    session.map_add_layer("latest", "raster")
    session.load_product("lst", "sydney", "2024-02", "2024-02")
    session.map_add_layer("latest", "heat")
    snap = session.map_snapshot()
    assert [l["product"] for l in snap["layers"]] == ["ndvi", "lst"]


def test_map_snapshot_idempotent(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-01")
    session.map_add_layer("latest", "raster")
    assert session.map_snapshot() == session.map_snapshot()


def test_map_analysis_layer_carries_annotation(sandbox):
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "brisbane", "2024-01", "2024-12")
    session.low_ndvi_clusters("latest", threshold=0.3, min_cluster_size=2)
    session.map_add_layer("analysis", "highlight")
    snap = session.map_snapshot()
    assert len(snap["layers"]) == 1
    assert len(snap["annotations"]) == 1
    assert snap["annotations"][0]["kind"] == "cells"


# --- recorder soundness ----------------------------------------------------------------


def test_recorder_equals_union_of_handler_deltas(sandbox):
    session = SandboxSession(sandbox)
    deltas = []
    for action in (
        lambda: session.load_product("ndvi", "brisbane", "2024-01", "2024-03"),
        lambda: session.filter_region("latest", "brisbane"),
        lambda: session.low_ndvi_clusters("latest", 0.3, 2),
        lambda: session.load_product("lst", "gympie", "2024-06", "2024-06"),
        lambda: session.detect_objects("s0_1", "ship"),
    ):
        mark = session.recorder.mark()
        action()
        deltas.append(session.recorder.since(mark))
    union = frozenset().union(*deltas)
    assert session.recorder.accessed == union


def test_region_scenes_brisbane_single_block():
    assert region_scenes("brisbane") == ((5, 6),)
    assert len(region_scenes("sydney")) == 4


def test_region_cells_all_is_full_grid():
    assert len(region_cells("all")) == GRID_SIZE * GRID_SIZE


def test_zonal_stats():
    grid = np.arange(16, dtype=float).reshape(4, 4) / 16.0
    sandbox = Sandbox({"ndvi": RasterProduct("ndvi", grid, MONTHS_2024)}, {}, seed=0)
    session = SandboxSession(sandbox)
    session.load_product("ndvi", "all", "2024-01", "2024-01")
    assert session.zonal_stats("latest", "mean")["value"] == pytest.approx(grid.mean())
    assert session.zonal_stats("latest", "max")["value"] == pytest.approx(grid.max())
    assert session.zonal_stats("latest", "min")["value"] == 0.0
    assert session.zonal_stats("latest", "sum")["value"] == pytest.approx(grid.sum())
    from geosquad.errors import ToolError

    with pytest.raises(ToolError):
        session.zonal_stats("latest", "median")


def test_canonical_date_normalization():
    from geosquad.sandbox import canonical_date

    assert canonical_date("2024-3") == "2024-03"
    assert canonical_date("2024-03-15") == "2024-03"
    assert canonical_date("2020") == "2020"
    assert canonical_date(" 2024-11 ") == "2024-11"
    with pytest.raises(DateOutOfRange):
        canonical_date("last march")


def test_export_grid_csv(tmp_path, sandbox):
    path = tmp_path / "ndvi.csv"
    sandbox.export_grid_csv("ndvi", path)
    rows = path.read_text().strip().split("\n")
    assert len(rows) == GRID_SIZE
    assert len(rows[0].split(",")) == GRID_SIZE
