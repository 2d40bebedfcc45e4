"""Synthetic geodata sandbox: raster products, vision scenes, tool handlers.

Grids are abstract indexed rasters (row 0 = north edge), one static H x W
field per product; the dates list describes coverage and addresses
datapoints, so a cell contributes one DataPointKey per covered date.
Generation is a pure function of (product, seed), with planted motifs
exported as fixture metadata so gold answers never require running agents.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .core import DataPointKey, PRODUCTS
from .errors import (
    DateOutOfRange,
    MissingProduct,
    ToolError,
    UnknownRegion,
    UnknownScene,
    WrongProduct,
)

GRID_SIZE = 64
SCENE_GRID = 8
SCENE_BLOCK = GRID_SIZE // SCENE_GRID
SCENE_PIXELS = 256

MONTHS_2024 = tuple(f"2024-{m:02d}" for m in range(1, 13))

# (date coverage, value range) per raster product; detection/lcc are
# scene-level pseudo-rasters derived from the annotation store.
PRODUCT_DATES = {
    "ndvi": MONTHS_2024,
    "ref_b2": MONTHS_2024,
    "lst": MONTHS_2024,
    "aod550": MONTHS_2024,
    "built_s": ("2020",),
    "population": ("2020",),
    "canopy": ("2020",),
    "treeloss": ("2020",),
    "detection": ("2024",),
    "lcc": ("2024",),
}

VALUE_RANGES = {
    "ndvi": (-0.2, 1.0),
    "ref_b2": (0.0, 1.0),
    "lst": (260.0, 330.0),
    "aod550": (0.0, 2.5),
    "built_s": (0.0, 1_000_000.0),
    "population": (0.0, 50_000.0),
    "canopy": (0.0, 100.0),
    "treeloss": (0.0, 1.0),
}

OBJECT_CLASSES = ("airplane", "ship", "vehicle", "storage_tank")
LANDCOVER_CLASSES = ("forest", "urban", "cropland", "water", "grassland")

_COMPARATORS = {">": ">", ">=": ">=", "<": "<", "<=": "<=", "≥": ">=", "≤": "<="}


def _rect(r0: int, r1: int, c0: int, c1: int) -> frozenset[tuple[int, int]]:
    return frozenset((r, c) for r in range(r0, r1 + 1) for c in range(c0, c1 + 1))


# Fixed rectangular-union masks; six localities plus two synthetic ones.
REGIONS: dict[str, frozenset[tuple[int, int]]] = {
    "brisbane": _rect(40, 47, 48, 55),
    "bundaberg": _rect(28, 33, 50, 55),
    "gympie": _rect(34, 38, 46, 50),
    "ipswich": _rect(42, 46, 40, 44),
    "sydney": _rect(54, 61, 44, 51),
    "melbourne": _rect(58, 63, 20, 29),
    "coralbay": _rect(8, 11, 8, 19) | _rect(12, 15, 8, 13),
    "westmere": _rect(18, 25, 28, 35),
}

ALL_REGION = "all"


def region_cells(region: str, grid_size: int = GRID_SIZE) -> frozenset[tuple[int, int]]:
    region = region.strip().lower()
    if region == ALL_REGION:
        return frozenset((r, c) for r in range(grid_size) for c in range(grid_size))
    try:
        return REGIONS[region]
    except KeyError:
        raise UnknownRegion(f"unknown region {region!r}") from None


def scene_id(row: int, col: int) -> str:
    return f"s{row}_{col}"


def parse_scene_id(sid: str) -> tuple[int, int]:
    match = re.fullmatch(r"s(\d+)_(\d+)", sid.strip().lower())
    if not match:
        raise UnknownScene(f"malformed scene id {sid!r}")
    row, col = int(match.group(1)), int(match.group(2))
    if not (0 <= row < SCENE_GRID and 0 <= col < SCENE_GRID):
        raise UnknownScene(f"scene {sid} outside the {SCENE_GRID}x{SCENE_GRID} scene grid")
    return row, col


def region_scenes(region: str) -> tuple[tuple[int, int], ...]:
    """Scene cells whose raster block intersects the region mask."""
    cells = region_cells(region)
    hits = sorted(
        {(r // SCENE_BLOCK, c // SCENE_BLOCK) for r, c in cells}
    )
    return tuple(hits)


def canonical_date(text: str) -> str:
    """Normalize model-provided dates to ISO 'YYYY' or 'YYYY-MM'."""
    text = text.strip()
    match = re.match(r"^(\d{4})(?:-(\d{1,2}))?", text)
    if not match:
        raise DateOutOfRange(f"unparseable date {text!r}")
    year, month = match.group(1), match.group(2)
    if month is None:
        return year
    return f"{year}-{int(month):02d}"


def _stable_rng(*parts) -> np.random.Generator:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


def _unit_hash(*parts) -> float:
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:7], "big") / float(1 << 56)


def _bilinear_upsample(coarse: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    ch, cw = coarse.shape
    rows = np.linspace(0.0, ch - 1, out_h)
    cols = np.linspace(0.0, cw - 1, out_w)
    r0 = np.floor(rows).astype(int)
    c0 = np.floor(cols).astype(int)
    r1 = np.minimum(r0 + 1, ch - 1)
    c1 = np.minimum(c0 + 1, cw - 1)
    fr = (rows - r0)[:, None]
    fc = (cols - c0)[None, :]
    top = coarse[np.ix_(r0, c0)] * (1 - fc) + coarse[np.ix_(r0, c1)] * fc
    bottom = coarse[np.ix_(r1, c0)] * (1 - fc) + coarse[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bottom * fr


@dataclass
class RasterProduct:
    """One synthetic data product: a value grid plus its date coverage."""

    product: str
    grid: np.ndarray
    dates: tuple[str, ...]
    region_mask: Mapping[str, frozenset[tuple[int, int]]] = field(
        default_factory=lambda: dict(REGIONS)
    )

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.dates = tuple(self.dates)

    @property
    def height(self) -> int:
        return self.grid.shape[0]

    @property
    def width(self) -> int:
        return self.grid.shape[1]

    def date_slice(self, start: str, end: str) -> tuple[str, ...]:
        start, end = canonical_date(start), canonical_date(end)
        if start not in self.dates or end not in self.dates:
            raise DateOutOfRange(
                f"{self.product} covers {self.dates[0]}..{self.dates[-1]}, "
                f"got {start}..{end}"
            )
        i, j = self.dates.index(start), self.dates.index(end)
        if i > j:
            raise DateOutOfRange(f"empty date range {start}..{end}")
        return self.dates[i : j + 1]


@dataclass(frozen=True)
class SceneAnnotation:
    """Ground truth for one vision scene."""

    scene: str
    landcover: str
    objects: tuple[tuple[str, tuple[int, int, int, int]], ...]


@dataclass(frozen=True)
class VisionConfig:
    """Seeded confusion model for the detection / classification stubs."""

    detection_recall: float = 1.0
    detection_precision: float = 1.0
    lcc_accuracy: float = 1.0


class AccessRecorder:
    """Append-only per-run log of datapoints touched by tool handlers."""

    def __init__(self):
        self._log: list[DataPointKey] = []
        self._seen: set[DataPointKey] = set()

    def record(self, keys: Iterable[DataPointKey]) -> None:
        for key in keys:
            self._log.append(key)
            self._seen.add(key)

    def mark(self) -> int:
        return len(self._log)

    def since(self, mark: int) -> frozenset[DataPointKey]:
        return frozenset(self._log[mark:])

    @property
    def accessed(self) -> frozenset[DataPointKey]:
        return frozenset(self._seen)


def generate_raster(product: str, seed: int, grid_size: int = GRID_SIZE) -> RasterProduct:
    """Smooth seeded value-noise clamped to the product's unit range."""
    lo, hi = VALUE_RANGES[product]
    rng = _stable_rng("raster", product, seed)
    coarse = rng.uniform(0.0, 1.0, size=(9, 9))
    smooth = _bilinear_upsample(coarse, grid_size, grid_size)
    if product == "treeloss":
        grid = (smooth > 0.85).astype(float)
    elif product == "ndvi":
        grid = 0.25 + smooth * 0.65
    elif product == "ref_b2":
        grid = 0.05 + smooth * 0.55
    elif product == "lst":
        grid = 278.0 + smooth * 22.0
    elif product == "aod550":
        grid = 0.05 + smooth * 0.75
    elif product == "built_s":
        grid = smooth * 500_000.0
    elif product == "population":
        grid = smooth * 15_000.0
    elif product == "canopy":
        grid = 15.0 + smooth * 75.0
    else:
        raise ValueError(f"no raster generator for {product}")
    grid = np.clip(grid, lo, hi)
    return RasterProduct(product=product, grid=grid, dates=PRODUCT_DATES[product])


# Extreme value planted per product inside each region; treeloss scars sit
# on the canopy motif cells so reforestation candidates are nonempty.
_MOTIF_VALUES = {
    "ndvi": 0.05,
    "ref_b2": 0.85,
    "lst": 312.0,
    "aod550": 1.6,
    "built_s": 900_000.0,
    "population": 30_000.0,
    "canopy": 5.0,
    "treeloss": 1.0,
}


def _motif_anchor(region: str, product: str, seed: int) -> list[tuple[int, int]]:
    cells = REGIONS[region]
    anchors = sorted(
        (r, c)
        for r, c in cells
        if {(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)} <= cells
    )
    rng = _stable_rng("motif", product, region, seed)
    r, c = anchors[int(rng.integers(len(anchors)))]
    return [(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)]


def plant_motifs(products: Mapping[str, RasterProduct], seed: int) -> dict[str, dict[str, list[list[int]]]]:
    """Plant one 2x2 extreme patch per (product, region); returns metadata."""
    motifs: dict[str, dict[str, list[list[int]]]] = {}
    canopy_cells: dict[str, list[tuple[int, int]]] = {}
    for product, value in _MOTIF_VALUES.items():
        raster = products[product]
        motifs[product] = {}
        for region in REGIONS:
            if product == "treeloss":
                cells = canopy_cells[region]
            else:
                cells = _motif_anchor(region, product, seed)
                if product == "canopy":
                    canopy_cells[region] = cells
            for r, c in cells:
                raster.grid[r, c] = value
            motifs[product][region] = [[r, c] for r, c in cells]
    return motifs


def generate_annotations(seed: int, config: VisionConfig = VisionConfig()) -> dict[str, SceneAnnotation]:
    """Deterministic per-scene objects and land-cover labels."""
    scenes: dict[str, SceneAnnotation] = {}
    for row in range(SCENE_GRID):
        for col in range(SCENE_GRID):
            sid = scene_id(row, col)
            rng = _stable_rng("scene", sid, seed)
            landcover = LANDCOVER_CLASSES[int(rng.integers(len(LANDCOVER_CLASSES)))]
            objects = []
            for i in range(int(rng.integers(1, 6))):
                cls = OBJECT_CLASSES[int(rng.integers(len(OBJECT_CLASSES)))]
                side = int(rng.integers(24, 49))
                x0 = int(rng.integers(0, SCENE_PIXELS - side))
                y0 = int(rng.integers(0, SCENE_PIXELS - side))
                objects.append((cls, (x0, y0, x0 + side, y0 + side)))
            scenes[sid] = SceneAnnotation(scene=sid, landcover=landcover, objects=tuple(objects))
    return scenes


class Sandbox:
    """Immutable product catalog shared read-only across benchmark runs."""

    def __init__(
        self,
        products: Mapping[str, RasterProduct],
        annotations: Mapping[str, SceneAnnotation],
        seed: int,
        vision: VisionConfig = VisionConfig(),
        motifs: Mapping[str, Mapping[str, list]] | None = None,
    ):
        self.products = dict(products)
        self.annotations = dict(annotations)
        self.seed = seed
        self.vision = vision
        self.motifs = {k: dict(v) for k, v in (motifs or {}).items()}

    @classmethod
    def generate(cls, seed: int, vision: VisionConfig = VisionConfig()) -> "Sandbox":
        products = {
            name: generate_raster(name, seed) for name in VALUE_RANGES
        }
        motifs = plant_motifs(products, seed)
        annotations = generate_annotations(seed)
        det_grid = np.zeros((SCENE_GRID, SCENE_GRID))
        lcc_grid = np.zeros((SCENE_GRID, SCENE_GRID))
        for sid, ann in annotations.items():
            r, c = parse_scene_id(sid)
            det_grid[r, c] = len(ann.objects)
            lcc_grid[r, c] = LANDCOVER_CLASSES.index(ann.landcover)
        products["detection"] = RasterProduct("detection", det_grid, PRODUCT_DATES["detection"])
        products["lcc"] = RasterProduct("lcc", lcc_grid, PRODUCT_DATES["lcc"])
        return cls(products, annotations, seed=seed, vision=vision, motifs=motifs)

    def bounds(self) -> dict[str, tuple[int, int, tuple[str, ...]]]:
        return {
            name: (p.height, p.width, p.dates) for name, p in self.products.items()
        }

    def fixture_metadata(self) -> dict:
        return {
            "seed": self.seed,
            "grid_size": GRID_SIZE,
            "scene_grid": SCENE_GRID,
            "products": {
                name: {"height": p.height, "width": p.width, "dates": list(p.dates)}
                for name, p in sorted(self.products.items())
            },
            "regions": {name: sorted(map(list, cells)) for name, cells in REGIONS.items()},
            "scene_regions": {
                name: [list(s) for s in region_scenes(name)] for name in REGIONS
            },
            "motifs": self.motifs,
            "landcover": {
                sid: ann.landcover for sid, ann in sorted(self.annotations.items())
            },
            "objects": {
                sid: [{"class": cls, "box": list(box)} for cls, box in ann.objects]
                for sid, ann in sorted(self.annotations.items())
            },
        }

    def fixture_hash(self) -> str:
        blob = json.dumps(self.fixture_metadata(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def export_grid_csv(self, product: str, path) -> None:
        raster = self.products[product]
        np.savetxt(path, raster.grid, delimiter=",", fmt="%.6f")


@dataclass(frozen=True)
class DatasetHandle:
    """Opaque reference to a selection of cells of one product."""

    id: str
    product: str
    cells: frozenset[tuple[int, int]]
    dates: tuple[str, ...]
    region: str


def find_clusters(
    cells: Iterable[tuple[int, int]],
    values: Mapping[tuple[int, int], float],
    threshold: float,
    min_cluster_size: int,
) -> list[list[tuple[int, int]]]:
    """4-connected components of below-threshold cells, largest first;
    ties broken by northwest-most member."""
    low = {c for c in cells if values[c] < threshold}
    clusters: list[list[tuple[int, int]]] = []
    remaining = set(low)
    while remaining:
        start = remaining.pop()
        stack = [start]
        component = {start}
        while stack:
            r, c = stack.pop()
            for nb in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if nb in remaining:
                    remaining.remove(nb)
                    component.add(nb)
                    stack.append(nb)
        if len(component) >= min_cluster_size:
            clusters.append(sorted(component))
    clusters.sort(key=lambda comp: (-len(comp), min(comp)))
    return clusters


class SandboxSession:
    """Per-task-run mutable state: recorder, handle table, map state.

    Every data-touching handler records its selection; handles are opaque
    sequential ids, and the symbolic reference "latest" resolves to the
    most recent handle of the required product.
    """

    def __init__(self, sandbox: Sandbox):
        self.sandbox = sandbox
        self.recorder = AccessRecorder()
        self.handles: dict[str, DatasetHandle] = {}
        self._handle_order: list[str] = []
        self.layers: list[dict] = []
        self.annotations_drawn: list[dict] = []
        self.last_analysis: dict | None = None

    # -- handle management --

    def _new_handle(self, product: str, cells, dates, region: str) -> DatasetHandle:
        handle_id = f"h{len(self._handle_order) + 1}"
        handle = DatasetHandle(handle_id, product, frozenset(cells), tuple(dates), region)
        self.handles[handle_id] = handle
        self._handle_order.append(handle_id)
        return handle

    def resolve_handle(self, ref: str, products: Sequence[str] | None = None) -> DatasetHandle:
        ref = str(ref).strip().lower()
        if ref in self.handles:
            handle = self.handles[ref]
            if products and handle.product not in products:
                raise WrongProduct(
                    f"handle {ref} holds {handle.product}, expected {'/'.join(products)}"
                )
            return handle
        if ref == "latest":
            for handle_id in reversed(self._handle_order):
                handle = self.handles[handle_id]
                if not products or handle.product in products:
                    return handle
            wanted = "/".join(products) if products else "any product"
            raise MissingProduct(
                f"no loaded dataset for {wanted}; load it first",
                product=products[0] if products else None,
            )
        raise MissingProduct(f"unknown dataset handle {ref!r}", product=None)

    def _grid_values(self, handle: DatasetHandle) -> dict[tuple[int, int], float]:
        grid = self.sandbox.products[handle.product].grid
        return {cell: float(grid[cell]) for cell in handle.cells}

    # -- tool handlers --

    def load_product(self, product: str, region: str, date_start: str, date_end: str) -> dict:
        product = str(product).strip().lower()
        if product not in self.sandbox.products:
            raise MissingProduct(f"product {product!r} not in catalog", product=product)
        raster = self.sandbox.products[product]
        region = str(region).strip().lower()
        cells = region_cells(region, raster.height)
        if product in ("detection", "lcc"):
            cells = frozenset(region_scenes(region)) if region != ALL_REGION else frozenset(
                (r, c) for r in range(SCENE_GRID) for c in range(SCENE_GRID)
            )
        dates = raster.date_slice(date_start, date_end)
        handle = self._new_handle(product, cells, dates, region)
        self.recorder.record(
            DataPointKey(product, cell, date) for cell in sorted(handle.cells) for date in dates
        )
        return {
            "handle": handle.id,
            "product": product,
            "region": region,
            "cells": len(handle.cells),
            "dates": list(dates),
        }

    def filter_region(self, handle: str, region: str) -> dict:
        source = self.resolve_handle(handle)
        region = str(region).strip().lower()
        cells = region_cells(region)
        if source.product in ("detection", "lcc"):
            cells = frozenset(region_scenes(region))
        kept = source.cells & cells
        new = self._new_handle(source.product, kept, source.dates, region)
        return {
            "handle": new.id,
            "product": new.product,
            "region": region,
            "cells": len(kept),
        }

    def zonal_stats(self, handle: str, statistic: str) -> dict:
        source = self.resolve_handle(handle)
        statistic = str(statistic).strip().lower()
        values = list(self._grid_values(source).values())
        if statistic not in ("mean", "min", "max", "sum"):
            raise ToolError(f"unknown statistic {statistic!r}")
        if not values:
            result = 0.0
        else:
            result = {
                "mean": float(np.mean(values)),
                "min": float(np.min(values)),
                "max": float(np.max(values)),
                "sum": float(np.sum(values)),
            }[statistic]
        return {
            "handle": source.id,
            "statistic": statistic,
            "value": round(result, 6),
            "cells": len(source.cells),
        }

    def low_ndvi_clusters(self, handle: str, threshold: float, min_cluster_size: int) -> dict:
        source = self.resolve_handle(handle, products=("ndvi",))
        clusters = find_clusters(
            source.cells, self._grid_values(source), float(threshold), int(min_cluster_size)
        )
        self.last_analysis = {
            "product": source.product,
            "region": source.region,
            "date": f"{source.dates[0]}..{source.dates[-1]}",
            "cells": [cell for cluster in clusters for cell in cluster],
            "label": "low_ndvi_clusters",
        }
        return {
            "handle": source.id,
            "clusters": [[list(cell) for cell in cluster] for cluster in clusters],
            "count": len(clusters),
        }

    def threshold_zones(self, handle: str, comparator: str, value: float, products=None) -> dict:
        source = self.resolve_handle(handle, products=products)
        comparator = _COMPARATORS.get(str(comparator).strip())
        if comparator is None:
            raise ToolError(f"comparator must be one of {sorted(set(_COMPARATORS))}")
        grid_values = self._grid_values(source)
        value = float(value)
        ops = {
            ">": lambda v: v > value,
            ">=": lambda v: v >= value,
            "<": lambda v: v < value,
            "<=": lambda v: v <= value,
        }
        zone = sorted(cell for cell, v in grid_values.items() if ops[comparator](v))
        self.last_analysis = {
            "product": source.product,
            "region": source.region,
            "date": f"{source.dates[0]}..{source.dates[-1]}",
            "cells": zone,
            "label": f"{source.product} {comparator} {value}",
        }
        return {
            "handle": source.id,
            "comparator": comparator,
            "value": value,
            "cells": [list(c) for c in zone],
            "count": len(zone),
        }

    def reforestation_candidates(
        self,
        canopy_handle: str,
        loss_handle: str,
        canopy_below: float,
        require_loss: bool = True,
    ) -> dict:
        canopy = self.resolve_handle(canopy_handle, products=("canopy",))
        loss = self.resolve_handle(loss_handle, products=("treeloss",))
        canopy_values = self._grid_values(canopy)
        loss_values = self._grid_values(loss)
        threshold = float(canopy_below)
        candidates = []
        for cell, value in canopy_values.items():
            if value >= threshold:
                continue
            if require_loss and loss_values.get(cell, 0.0) != 1.0:
                continue
            candidates.append(cell)
        candidates.sort()
        self.last_analysis = {
            "product": "canopy",
            "region": canopy.region,
            "date": canopy.dates[0],
            "cells": candidates,
            "label": "reforestation_candidates",
        }
        return {
            "canopy_handle": canopy.id,
            "loss_handle": loss.id,
            "cells": [list(c) for c in candidates],
            "count": len(candidates),
        }

    def detect_objects(self, scene: str, object_class: str) -> dict:
        row, col = parse_scene_id(str(scene))
        sid = scene_id(row, col)
        if sid not in self.sandbox.annotations:
            raise UnknownScene(f"scene {sid} has no annotations")
        object_class = str(object_class).strip().lower()
        annotation = self.sandbox.annotations[sid]
        truth = [box for cls, box in annotation.objects if cls == object_class]
        vision = self.sandbox.vision
        boxes = [
            box
            for i, box in enumerate(truth)
            if _unit_hash("det", self.sandbox.seed, sid, i) < vision.detection_recall
        ]
        if vision.detection_precision < 1.0 and boxes:
            n_false = round(len(boxes) * (1.0 - vision.detection_precision) / vision.detection_precision)
            for i in range(n_false):
                offset = (i * 16) % (SCENE_PIXELS - 10)
                boxes.append((offset, (offset * 3) % (SCENE_PIXELS - 10), offset + 10, (offset * 3) % (SCENE_PIXELS - 10) + 10))
        self.recorder.record([DataPointKey("detection", (row, col), "2024")])
        self.last_analysis = {
            "product": "detection",
            "region": sid,
            "date": "2024",
            "cells": [(row, col)],
            "boxes": [list(b) for b in boxes],
            "label": object_class,
        }
        return {
            "scene": sid,
            "class": object_class,
            "boxes": [list(b) for b in boxes],
            "count": len(boxes),
        }

    def classify_landcover(self, scene: str) -> dict:
        row, col = parse_scene_id(str(scene))
        sid = scene_id(row, col)
        if sid not in self.sandbox.annotations:
            raise UnknownScene(f"scene {sid} has no annotations")
        truth = self.sandbox.annotations[sid].landcover
        if _unit_hash("lcc", self.sandbox.seed, sid) < self.sandbox.vision.lcc_accuracy:
            label = truth
        else:
            idx = LANDCOVER_CLASSES.index(truth)
            label = LANDCOVER_CLASSES[(idx + 1) % len(LANDCOVER_CLASSES)]
        self.recorder.record([DataPointKey("lcc", (row, col), "2024")])
        self.last_analysis = {
            "product": "lcc",
            "region": sid,
            "date": "2024",
            "cells": [(row, col)],
            "label": label,
        }
        return {"scene": sid, "landcover": label}

    def map_add_layer(self, source: str, style: str) -> dict:
        source = str(source).strip().lower()
        if source == "analysis" and self.last_analysis is not None:
            info = self.last_analysis
            layer = {
                "product": info["product"],
                "region": info["region"],
                "date": info["date"],
                "style": style,
            }
            self.layers.append(layer)
            grid = self.sandbox.products[info["product"]].grid
            annotation = {
                "kind": "boxes" if "boxes" in info else "cells",
                "label": info["label"],
                "cells": [list(c) for c in info["cells"]],
                "grid_size": grid.shape[0],
                "values": [round(float(grid[tuple(c)]), 6) for c in info["cells"]],
            }
            if "boxes" in info:
                annotation["boxes"] = info["boxes"]
            self.annotations_drawn.append(annotation)
        else:
            handle = self.resolve_handle(source if source != "analysis" else "latest")
            layer = {
                "product": handle.product,
                "region": handle.region,
                "date": f"{handle.dates[0]}..{handle.dates[-1]}",
                "style": style,
            }
            self.layers.append(layer)
        return {"layers": len(self.layers), "added": layer}

    def map_snapshot(self) -> dict:
        return {
            "layers": [dict(layer) for layer in self.layers],
            "annotations": [dict(a) for a in self.annotations_drawn],
        }

    def map_state(self) -> dict:
        return self.map_snapshot()

    def list_products(self) -> dict:
        return {
            "products": [
                {"product": name, "dates": [p.dates[0], p.dates[-1]]}
                for name, p in sorted(self.sandbox.products.items())
            ]
        }

    def list_regions(self) -> dict:
        return {"regions": sorted(REGIONS)}
