import type { MapState } from "./types.js";

/** Abstract grid heatmap: the sandbox has no CRS, so layers render as
 * translucent stacked tints and annotation cells as positioned squares. */

export const PRODUCT_COLORS: Record<string, string> = {
  ndvi: "#3a9d23",
  ref_b2: "#8e7cc3",
  lst: "#d94f2b",
  aod550: "#b78b43",
  built_s: "#6d6d6d",
  population: "#c2356f",
  canopy: "#1d6b43",
  treeloss: "#a0440a",
  detection: "#2a6fb0",
  lcc: "#3aa7a0",
};

const ANNOTATION_COLORS = ["#ffd23f", "#ff5d8f", "#4cc9f0", "#b5e48c"];

export interface MapHandlers {
  onToggleLayer: (index: number) => void;
}

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderMap(
  doc: Document,
  container: HTMLElement,
  mapState: MapState | null,
  hiddenLayers: number[],
  handlers: MapHandlers,
): void {
  container.textContent = "";
  container.classList.add("map-panel");

  if (!mapState || mapState.layers.length === 0) {
    const placeholder = el(doc, "div", "map-placeholder", "No layers yet — ask for a plot.");
    container.appendChild(placeholder);
    return;
  }

  const grid = el(doc, "div", "map-grid");
  const legend = el(doc, "ul", "map-legend");
  const hidden = new Set(hiddenLayers);

  mapState.layers.forEach((layer, index) => {
    const known = layer.product in PRODUCT_COLORS;
    const entry = el(doc, "li", "map-legend-entry");
    const swatch = el(doc, "span", "legend-swatch");
    if (known) {
      swatch.style.background = PRODUCT_COLORS[layer.product];
    }
    entry.appendChild(swatch);
    entry.appendChild(
      el(doc, "span", "legend-text", `${layer.product} · ${layer.region} · ${layer.date} (${layer.style})`),
    );
    if (!known) {
      entry.appendChild(el(doc, "span", "legend-warning", "unknown product"));
      legend.appendChild(entry);
      return; // layer skipped, warning badge shown
    }
    const toggle = doc.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = !hidden.has(index);
    toggle.className = "legend-toggle";
    toggle.addEventListener("change", () => handlers.onToggleLayer(index));
    entry.insertBefore(toggle, swatch);
    legend.appendChild(entry);

    if (!hidden.has(index)) {
      const tint = el(doc, "div", "map-layer");
      tint.style.background = PRODUCT_COLORS[layer.product];
      tint.dataset.product = layer.product;
      tint.title = `${layer.product} ${layer.region} ${layer.date}`;
      grid.appendChild(tint);
    }
  });

  mapState.annotations.forEach((annotation, aIndex) => {
    const color = ANNOTATION_COLORS[aIndex % ANNOTATION_COLORS.length];
    const size = annotation.grid_size ?? 64;
    annotation.cells.forEach((cell, cIndex) => {
      const [row, col] = cell;
      const node = el(doc, "div", "annotation-cell");
      node.style.background = color;
      node.style.left = `${(col / size) * 100}%`;
      node.style.top = `${(row / size) * 100}%`;
      node.style.width = `${100 / size}%`;
      node.style.height = `${100 / size}%`;
      const value = annotation.values?.[cIndex];
      const valueText = value === undefined ? "" : ` = ${value}`;
      node.title = `${annotation.label}${valueText} @ (${row}, ${col})`;
      grid.appendChild(node);
    });

    // detection boxes live in the 256px space of the annotation's scene
    if (annotation.boxes && annotation.cells.length > 0) {
      const [row, col] = annotation.cells[0];
      annotation.boxes.forEach((box) => {
        const [x0, y0, x1, y1] = box;
        const boxNode = el(doc, "div", "annotation-box");
        boxNode.style.left = `${((col + x0 / 256) / size) * 100}%`;
        boxNode.style.top = `${((row + y0 / 256) / size) * 100}%`;
        boxNode.style.width = `${((x1 - x0) / 256 / size) * 100}%`;
        boxNode.style.height = `${((y1 - y0) / 256 / size) * 100}%`;
        boxNode.title = annotation.label;
        grid.appendChild(boxNode);
      });
    }
  });

  container.appendChild(grid);
  container.appendChild(legend);
}
