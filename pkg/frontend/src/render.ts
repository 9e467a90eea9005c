/** SVG scene construction.
 *
 * Positions come verbatim from the server (no client-side layout), so the
 * browser view, the CLI SVG export, and any script agree on structure.
 * Elements carry data attributes for event delegation; nothing here
 * touches the DOM, making the renderer directly testable.
 */

import type { LinkRow, NodeRow, TopologyPayload } from "./api.js";
import type { Selection } from "./state.js";

export interface RenderOptions {
  width?: number;
  height?: number;
  labels?: boolean;
  /** Fill nodes from their cluster label instead of their type color. */
  colorByCluster?: boolean;
  selection?: Selection;
}

const CLUSTER_PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#17becf",
  "#bcbd22",
  "#7f7f7f",
];

const TRANSIT_FILL = "#bbbbbb";
const DEFAULT_FILL = "#444444";
const NODE_RADIUS = 5;

export function clusterColor(label: number, transitLabel: number | null): string {
  if (transitLabel !== null && label === transitLabel) {
    return TRANSIT_FILL;
  }
  return CLUSTER_PALETTE[((label % CLUSTER_PALETTE.length) + CLUSTER_PALETTE.length) % CLUSTER_PALETTE.length]!;
}

interface Placed {
  node: NodeRow;
  cx: number;
  cy: number;
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function place(nodes: NodeRow[], width: number, height: number): Map<string, Placed> {
  const located = nodes.filter((n) => n.x !== null && n.y !== null);
  const out = new Map<string, Placed>();
  if (located.length === 0) {
    return out;
  }
  const xs = located.map((n) => n.x as number);
  const ys = located.map((n) => n.y as number);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const margin = 25;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  for (const node of located) {
    const fx = ((node.x as number) - minX) / spanX;
    const fy = ((node.y as number) - minY) / spanY;
    out.set(node.name, {
      node,
      cx: margin + fx * (width - 2 * margin),
      // flip: larger world y is drawn higher up
      cy: height - margin - fy * (height - 2 * margin),
    });
  }
  return out;
}

function linkKey(l: LinkRow): string {
  return `${l.source}|${l.target}`;
}

function nodeFill(node: NodeRow, colorByCluster: boolean, transitLabel: number | null): string {
  if (colorByCluster && node.cluster !== null && node.cluster !== undefined) {
    return clusterColor(node.cluster, transitLabel);
  }
  return node.color || DEFAULT_FILL;
}

/** Render the scene as a standalone SVG string. */
export function renderScene(
  topo: TopologyPayload,
  opts: RenderOptions = {},
  transitLabel: number | null = null,
): string {
  const width = opts.width ?? 900;
  const height = opts.height ?? 650;
  const selection = opts.selection ?? { nodes: [], link: null };
  const placed = place(topo.nodes, width, height);
  const selectedLink = selection.link !== null ? `${selection.link[0]}|${selection.link[1]}` : null;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  ];
  for (const link of topo.links) {
    const a = placed.get(link.source);
    const b = placed.get(link.target);
    if (!a || !b) {
      continue;
    }
    const key = linkKey(link);
    const cls = key === selectedLink ? "link selected" : "link";
    parts.push(
      `<line class="${cls}" data-link="${esc(key)}" x1="${a.cx.toFixed(1)}" y1="${a.cy.toFixed(1)}" ` +
        `x2="${b.cx.toFixed(1)}" y2="${b.cy.toFixed(1)}"><title>${esc(
          `${link.source}–${link.target} ${link.length_km.toFixed(1)} km`,
        )}</title></line>`,
    );
  }
  for (const { node, cx, cy } of placed.values()) {
    const cls = selection.nodes.includes(node.name) ? "node selected" : "node";
    const fill = nodeFill(node, opts.colorByCluster ?? false, transitLabel);
    if (node.type === "amplifier") {
      const r = NODE_RADIUS;
      const pts = `${cx.toFixed(1)},${(cy - r).toFixed(1)} ${(cx - r).toFixed(1)},${(cy + r).toFixed(1)} ${(
        cx + r
      ).toFixed(1)},${(cy + r).toFixed(1)}`;
      parts.push(`<polygon class="${cls}" data-node="${esc(node.name)}" points="${pts}" fill="${fill}"/>`);
    } else {
      parts.push(
        `<circle class="${cls}" data-node="${esc(node.name)}" cx="${cx.toFixed(1)}" cy="${cy.toFixed(
          1,
        )}" r="${NODE_RADIUS}" fill="${fill}"/>`,
      );
    }
    if (opts.labels) {
      parts.push(
        `<text x="${(cx + 7).toFixed(1)}" y="${(cy - 7).toFixed(1)}" font-size="9">${esc(node.name)}</text>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** Node and link identity sets of a rendered payload, for consistency checks. */
export function sceneContents(topo: TopologyPayload): { nodes: Set<string>; links: Set<string> } {
  return {
    nodes: new Set(topo.nodes.map((n) => n.name)),
    links: new Set(topo.links.map(linkKey)),
  };
}
