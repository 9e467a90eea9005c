/** View state and its transitions.
 *
 * The state is immutable — every transition returns a fresh object — and
 * holds only what the server last confirmed plus the local selection.
 * Selection carries at most two nodes or one link, never both.
 */

import type { ClustersPayload, StatsPayload, TopologyPayload } from "./api.js";

export type Panel = "backbone" | "cluster" | "metro" | "aggregation";

export const PANELS: readonly Panel[] = ["backbone", "cluster", "metro", "aggregation"];

export interface Selection {
  /** Clicked nodes in click order, at most two. */
  nodes: string[];
  /** A clicked link as its sorted endpoint pair, exclusive with nodes. */
  link: [string, string] | null;
}

export interface ViewState {
  sessionId: string | null;
  topology: TopologyPayload;
  clusters: ClustersPayload | null;
  stats: StatsPayload | null;
  panel: Panel;
  selection: Selection;
  warnings: string[];
  error: string | null;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    topology: { nodes: [], links: [] },
    clusters: null,
    stats: null,
    panel: "backbone",
    selection: { nodes: [], link: null },
    warnings: [],
    error: null,
  };
}

export function setSession(state: ViewState, sessionId: string): ViewState {
  return { ...initialState(), sessionId, panel: state.panel };
}

export function setPanel(state: ViewState, panel: Panel): ViewState {
  return { ...state, panel };
}

/** Toggle a node in the selection; a third click replaces the oldest pick. */
export function toggleNode(state: ViewState, name: string): ViewState {
  if (!state.topology.nodes.some((n) => n.name === name)) {
    return state;
  }
  let nodes: string[];
  if (state.selection.nodes.includes(name)) {
    nodes = state.selection.nodes.filter((n) => n !== name);
  } else {
    nodes = [...state.selection.nodes, name].slice(-2);
  }
  return { ...state, selection: { nodes, link: null } };
}

/** Select a link (by either endpoint order); clears any node selection. */
export function selectLink(state: ViewState, a: string, b: string): ViewState {
  const [lo, hi] = a < b ? [a, b] : [b, a];
  const exists = state.topology.links.some((l) => l.source === lo && l.target === hi);
  if (!exists) {
    return state;
  }
  return { ...state, selection: { nodes: [], link: [lo, hi] } };
}

export function clearSelection(state: ViewState): ViewState {
  return { ...state, selection: { nodes: [], link: null } };
}

/** Fold a confirmed server topology in; stale selection entries drop out. */
export function applyTopology(state: ViewState, payload: TopologyPayload): ViewState {
  const names = new Set(payload.nodes.map((n) => n.name));
  const nodes = state.selection.nodes.filter((n) => names.has(n));
  let link = state.selection.link;
  if (link !== null) {
    const [lo, hi] = link;
    if (!payload.links.some((l) => l.source === lo && l.target === hi)) {
      link = null;
    }
  }
  return {
    ...state,
    topology: { nodes: payload.nodes, links: payload.links },
    selection: { nodes: link !== null ? [] : nodes, link },
    warnings: payload.warnings ?? [],
    error: null,
  };
}

export function applyClusters(state: ViewState, payload: ClustersPayload): ViewState {
  return { ...state, clusters: payload, warnings: payload.warnings ?? [], error: null };
}

export function applyStats(state: ViewState, payload: StatsPayload): ViewState {
  return { ...state, stats: payload, error: null };
}

export function setError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

function hasLink(state: ViewState, a: string, b: string): boolean {
  const [lo, hi] = a < b ? [a, b] : [b, a];
  return state.topology.links.some((l) => l.source === lo && l.target === hi);
}

/** Two distinct nodes picked and not already linked — offer "add link". */
export function canAddLink(state: ViewState): boolean {
  const picked = state.selection.nodes;
  if (picked.length !== 2) {
    return false;
  }
  const [a, b] = picked as [string, string];
  return a !== b && !hasLink(state, a, b);
}

/** Two picked non-amplifier nodes make valid horseshoe ends. */
export function horseshoeEnds(state: ViewState): [string, string] | null {
  const picked = state.selection.nodes;
  if (picked.length !== 2) {
    return null;
  }
  const [a, b] = picked as [string, string];
  const typeOf = new Map(state.topology.nodes.map((n) => [n.name, n.type]));
  if (typeOf.get(a) === "amplifier" || typeOf.get(b) === "amplifier") {
    return null;
  }
  return [a, b];
}

/** Cluster labels that can host a metro structure (transit excluded). */
export function metroClusterChoices(state: ViewState): number[] {
  if (state.clusters === null) {
    return [];
  }
  const transit = state.clusters.transit_label;
  return Object.keys(state.clusters.clusters)
    .map(Number)
    .filter((label) => label !== transit)
    .sort((x, y) => x - y);
}
