// Node-link tree with edge widths proportional to flow counts.
//
// Each category traversing an edge draws its own parallel stroke whose
// width is `count * maxEdgeWidth / maxCount`, so the rendered width always
// stays proportional to the served count. Tree edges that carried no flow
// render as a hairline so the structure stays visible.

import type { FlowEdge, TreePayload } from "../types.js";
import { clear, svgEl } from "./svg.js";

export interface TreeViewOptions {
  width?: number;
  height?: number;
  maxEdgeWidth?: number;
  hairline?: number;
  categoryColors?: Record<string, string>;
}

const DEFAULT_COLORS: Record<string, string> = {
  "original-correct": "#2e7d32",
  "original-wrong": "#c62828",
  attacked: "#f9a825",
};
const FALLBACK_COLORS = ["#1565c0", "#6a1b9a", "#00838f", "#ef6c00"];

interface LaidOutNode {
  index: number;
  x: number;
  y: number;
}

function layout(tree: TreePayload, width: number, height: number): Map<number, LaidOutNode> {
  const depths = new Map<number, number>();
  const order: number[] = [];
  const walk = (index: number, depth: number): void => {
    depths.set(index, depth);
    const node = tree.nodes[index];
    if (!node.leaf && node.left !== null && node.right !== null) {
      walk(node.left, depth + 1);
      order.push(index);
      walk(node.right, depth + 1);
    } else {
      order.push(index);
    }
  };
  walk(tree.root, 0);

  const positions = new Map<number, LaidOutNode>();
  const stepX = width / (order.length + 1);
  const maxDepth = Math.max(1, tree.depth);
  const stepY = height / (maxDepth + 1);
  order.forEach((index, i) => {
    positions.set(index, {
      index,
      x: stepX * (i + 1),
      y: stepY * ((depths.get(index) ?? 0) + 1),
    });
  });
  return positions;
}

function nodeTooltip(tree: TreePayload, index: number): string {
  const node = tree.nodes[index];
  const counts = `counts [${node.counts.join(", ")}]`;
  if (node.leaf) return `node ${index}: leaf, ${counts}`;
  return (
    `node ${index}: feature[${node.feature}] <= ` +
    `${node.threshold?.toFixed(4)}, ${counts}`
  );
}

export function renderTree(
  container: Element,
  tree: TreePayload,
  flows: FlowEdge[],
  options: TreeViewOptions = {},
): SVGSVGElement {
  const width = options.width ?? 640;
  const height = options.height ?? 360;
  const maxEdgeWidth = options.maxEdgeWidth ?? 12;
  const hairline = options.hairline ?? 0.75;
  const colors = { ...DEFAULT_COLORS, ...(options.categoryColors ?? {}) };

  const positions = layout(tree, width, height);
  const flowByEdge = new Map<string, Record<string, number>>();
  let maxCount = 0;
  for (const flow of flows) {
    flowByEdge.set(`${flow.parent}-${flow.child}`, flow.counts);
    for (const count of Object.values(flow.counts)) {
      maxCount = Math.max(maxCount, count);
    }
  }
  const widthPerUnit = maxCount > 0 ? maxEdgeWidth / maxCount : 0;

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width,
    height,
    class: "tree-view",
  });

  let fallback = 0;
  const colorOf = (category: string): string => {
    if (!(category in colors)) {
      colors[category] = FALLBACK_COLORS[fallback++ % FALLBACK_COLORS.length];
    }
    return colors[category];
  };

  for (const node of tree.nodes) {
    if (node.leaf || node.left === null || node.right === null) continue;
    const from = positions.get(node.index)!;
    for (const childIndex of [node.left, node.right]) {
      const to = positions.get(childIndex)!;
      const counts = flowByEdge.get(`${node.index}-${childIndex}`) ?? {};
      const categories = Object.keys(counts).sort();
      if (categories.length === 0) {
        svg.append(
          svgEl("line", {
            x1: from.x,
            y1: from.y,
            x2: to.x,
            y2: to.y,
            stroke: "#9e9e9e",
            "stroke-width": hairline,
            class: "tree-edge tree-edge-empty",
            "data-parent": node.index,
            "data-child": childIndex,
            "data-count": 0,
          }),
        );
        continue;
      }
      // stack category strokes side by side, centred on the edge
      const widths = categories.map((c) => counts[c] * widthPerUnit);
      const total = widths.reduce((a, b) => a + b, 0);
      const dx = to.x - from.x;
      const dy = to.y - from.y;
      const len = Math.hypot(dx, dy) || 1;
      const nx = -dy / len;
      const ny = dx / len;
      let offset = -total / 2;
      categories.forEach((category, i) => {
        const w = widths[i];
        const mid = offset + w / 2;
        offset += w;
        svg.append(
          svgEl("line", {
            x1: from.x + nx * mid,
            y1: from.y + ny * mid,
            x2: to.x + nx * mid,
            y2: to.y + ny * mid,
            stroke: colorOf(category),
            "stroke-width": w,
            class: "tree-edge",
            "data-parent": node.index,
            "data-child": childIndex,
            "data-category": category,
            "data-count": counts[category],
          }),
        );
      });
    }
  }

  for (const node of tree.nodes) {
    const at = positions.get(node.index)!;
    const circle = svgEl("circle", {
      cx: at.x,
      cy: at.y,
      r: node.leaf ? 5 : 7,
      fill: node.leaf ? "#eceff1" : "#37474f",
      stroke: "#263238",
      class: node.leaf ? "tree-node tree-leaf" : "tree-node",
      "data-index": node.index,
    });
    circle.append(svgEl("title", {}, nodeTooltip(tree, node.index)));
    svg.append(circle);
  }

  clear(container);
  container.append(svg);
  return svg;
}
