/** Browser bootstrap: binds the forms, the SVG scene, and the service.
 *
 * All topology changes round-trip through the service; after every action
 * the scene re-renders from a fresh GET /topology, so what is on screen is
 * exactly what the server holds.
 */

import { ApiError, Client } from "./api.js";
import type { FieldError } from "./forms.js";
import { backboneForm, clusterForm, horseshoeForm, metroForm } from "./forms.js";
import { renderStatsPanels } from "./histogram.js";
import { renderScene } from "./render.js";
import type { Panel, ViewState } from "./state.js";
import {
  PANELS,
  applyClusters,
  applyStats,
  applyTopology,
  canAddLink,
  clearSelection,
  horseshoeEnds,
  initialState,
  metroClusterChoices,
  selectLink,
  setError,
  setPanel,
  setSession,
  toggleNode,
} from "./state.js";

declare global {
  interface Window {
    /** Override when the service runs on a different origin than the bundle. */
    OPTINETGEN_API?: string;
  }
}

const client = new Client(window.OPTINETGEN_API ?? window.location.origin);
let state: ViewState = initialState();

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function inputValue(id: string): string {
  return byId<HTMLInputElement>(id).value;
}

function update(next: ViewState): void {
  state = next;
  draw();
}

function showFieldErrors(prefix: string, errors: FieldError[]): void {
  for (const el of document.querySelectorAll(`[data-error-for^="${prefix}"]`)) {
    el.textContent = "";
  }
  for (const e of errors) {
    const slot = document.querySelector(`[data-error-for="${prefix}.${e.field}"]`);
    if (slot !== null) {
      slot.textContent = e.message;
    } else {
      update(setError(state, `${e.field}: ${e.message}`));
    }
  }
}

async function guard(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (e) {
    const message = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
    update(setError(state, message));
  }
}

async function refreshTopology(): Promise<void> {
  if (state.sessionId === null) {
    return;
  }
  const topo = await client.topology(state.sessionId);
  update(applyTopology(state, topo));
}

async function refreshStats(): Promise<void> {
  if (state.sessionId === null || state.topology.nodes.length === 0) {
    return;
  }
  update(applyStats(state, await client.stats(state.sessionId)));
}

async function refreshClusters(): Promise<void> {
  if (state.sessionId === null) {
    return;
  }
  update(applyClusters(state, await client.clusters(state.sessionId)));
}

function draw(): void {
  const scene = byId<HTMLDivElement>("scene");
  scene.innerHTML = renderScene(
    state.topology,
    {
      labels: byId<HTMLInputElement>("show-labels").checked,
      colorByCluster: state.panel !== "backbone" && state.clusters !== null,
      selection: state.selection,
    },
    state.clusters?.transit_label ?? null,
  );
  byId<HTMLSpanElement>("session-label").textContent = state.sessionId ?? "—";
  byId<HTMLDivElement>("warnings").textContent = state.warnings.join(" · ");
  byId<HTMLDivElement>("error").textContent = state.error ?? "";

  for (const panel of PANELS) {
    byId<HTMLElement>(`panel-${panel}`).hidden = panel !== state.panel;
    byId<HTMLButtonElement>(`tab-${panel}`).classList.toggle("active", panel === state.panel);
  }

  const picked = state.selection.nodes;
  byId<HTMLSpanElement>("picked-nodes").textContent = picked.length > 0 ? picked.join(" + ") : "none";
  byId<HTMLButtonElement>("add-link").disabled = !canAddLink(state);
  byId<HTMLButtonElement>("delete-link").disabled = state.selection.link === null;

  const stats = byId<HTMLDivElement>("stats");
  stats.innerHTML = state.stats !== null ? renderStatsPanels(state.stats) : "";

  const choice = byId<HTMLSelectElement>("metro-cluster");
  const labels = metroClusterChoices(state);
  const current = choice.value;
  choice.innerHTML = labels.map((l) => `<option value="${l}">cluster ${l}</option>`).join("");
  if (labels.map(String).includes(current)) {
    choice.value = current;
  }

  const ends = horseshoeEnds(state);
  byId<HTMLSpanElement>("horseshoe-ends").textContent =
    ends !== null ? `${ends[0]} ↔ ${ends[1]}` : "select two non-amplifier nodes";
  byId<HTMLButtonElement>("generate-horseshoe").disabled = ends === null;
}

function bindScene(): void {
  byId<HTMLDivElement>("scene").addEventListener("click", (ev) => {
    const target = ev.target instanceof Element ? ev.target.closest("[data-node],[data-link]") : null;
    if (target === null) {
      update(clearSelection(state));
      return;
    }
    const nodeName = target.getAttribute("data-node");
    if (nodeName !== null) {
      update(toggleNode(state, nodeName));
      return;
    }
    const linkKey = target.getAttribute("data-link");
    if (linkKey !== null) {
      const [a, b] = linkKey.split("|");
      if (a !== undefined && b !== undefined) {
        update(selectLink(state, a, b));
      }
    }
  });
}

function bindTabs(): void {
  for (const panel of PANELS) {
    byId<HTMLButtonElement>(`tab-${panel}`).addEventListener("click", () => {
      update(setPanel(state, panel as Panel));
    });
  }
}

function degreeRowsFromTable(): Array<{ degree: string; fraction: string }> {
  const rows: Array<{ degree: string; fraction: string }> = [];
  for (const tr of document.querySelectorAll("#degree-rows tr")) {
    const [d, f] = tr.querySelectorAll("input");
    if (d !== undefined && f !== undefined) {
      rows.push({ degree: d.value, fraction: f.value });
    }
  }
  return rows;
}

function bindBackbone(): void {
  byId<HTMLButtonElement>("generate-backbone").addEventListener("click", () =>
    guard(async () => {
      const built = backboneForm({
        strategy: byId<HTMLSelectElement>("bb-strategy").value,
        nodes: inputValue("bb-nodes"),
        seed: inputValue("bb-seed"),
        layout: byId<HTMLSelectElement>("bb-layout").value,
        degreeRows: degreeRowsFromTable(),
        fit: byId<HTMLInputElement>("bb-fit").checked,
      });
      if (!built.ok) {
        showFieldErrors("backbone", built.errors);
        return;
      }
      showFieldErrors("backbone", []);
      if (state.sessionId === null) {
        return;
      }
      await client.generateBackbone(state.sessionId, built.value.strategy, built.value.params);
      await refreshTopology();
      await refreshStats();
    }),
  );
}

function bindClusterPanel(): void {
  byId<HTMLButtonElement>("run-clusters").addEventListener("click", () =>
    guard(async () => {
      const built = clusterForm({
        epsilon: inputValue("cl-epsilon"),
        minPoints: inputValue("cl-min-points"),
        mode: byId<HTMLSelectElement>("cl-mode").value,
        avoidSingle: byId<HTMLInputElement>("cl-avoid-single").checked,
      });
      if (!built.ok) {
        showFieldErrors("cluster", built.errors);
        return;
      }
      showFieldErrors("cluster", []);
      if (state.sessionId === null) {
        return;
      }
      update(applyClusters(state, await client.assignClusters(state.sessionId, built.value)));
      await refreshTopology();
    }),
  );
}

function bindMetroPanel(): void {
  byId<HTMLButtonElement>("generate-metro").addEventListener("click", () =>
    guard(async () => {
      const built = metroForm({
        clusterLabel: byId<HTMLSelectElement>("metro-cluster").value,
        kind: byId<HTMLSelectElement>("metro-kind").value,
        nodes: inputValue("metro-nodes"),
        nrings: inputValue("metro-nrings"),
      });
      if (!built.ok) {
        showFieldErrors("metro", built.errors);
        return;
      }
      showFieldErrors("metro", []);
      if (state.sessionId === null) {
        return;
      }
      await client.generateMetro(state.sessionId, built.value);
      await refreshTopology();
      await refreshClusters();
    }),
  );
}

function bindAggregationPanel(): void {
  byId<HTMLButtonElement>("generate-horseshoe").addEventListener("click", () =>
    guard(async () => {
      const ends = horseshoeEnds(state);
      if (ends === null || state.sessionId === null) {
        return;
      }
      const built = horseshoeForm({ end1: ends[0], end2: ends[1], hops: inputValue("hs-hops") });
      if (!built.ok) {
        showFieldErrors("horseshoe", built.errors);
        return;
      }
      showFieldErrors("horseshoe", []);
      await client.generateHorseshoe(state.sessionId, built.value);
      await refreshTopology();
    }),
  );
}

function bindLinkTools(): void {
  byId<HTMLButtonElement>("add-link").addEventListener("click", () =>
    guard(async () => {
      if (!canAddLink(state) || state.sessionId === null) {
        return;
      }
      const [a, b] = state.selection.nodes as [string, string];
      const length = Number(inputValue("link-length"));
      if (!Number.isFinite(length) || length <= 0) {
        update(setError(state, "link length must be a positive number of km"));
        return;
      }
      if (!window.confirm(`Add a ${length} km link ${a} – ${b}?`)) {
        return;
      }
      await client.addLink(state.sessionId, a, b, length);
      await refreshTopology();
    }),
  );
  byId<HTMLButtonElement>("delete-link").addEventListener("click", () =>
    guard(async () => {
      if (state.selection.link === null || state.sessionId === null) {
        return;
      }
      const [a, b] = state.selection.link;
      const res = await client.deleteLink(state.sessionId, a, b);
      await refreshTopology();
      update({ ...state, warnings: res.warnings ?? [] });
    }),
  );
  byId<HTMLButtonElement>("undo").addEventListener("click", () =>
    guard(async () => {
      if (state.sessionId === null) {
        return;
      }
      await client.undo(state.sessionId);
      await refreshTopology();
      await refreshClusters();
    }),
  );
}

function download(name: string, payload: BlobPart, type: string): void {
  const blob = new Blob([payload], { type });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = name;
  a.click();
  URL.revokeObjectURL(url);
}

function bindExports(): void {
  byId<HTMLButtonElement>("export-json").addEventListener("click", () =>
    guard(async () => {
      if (state.sessionId === null) {
        return;
      }
      download("workbook.json", await client.exportText(state.sessionId, "json"), "application/json");
    }),
  );
  byId<HTMLButtonElement>("export-csv").addEventListener("click", () =>
    guard(async () => {
      if (state.sessionId === null) {
        return;
      }
      download("workbook.zip", await client.exportZip(state.sessionId), "application/zip");
    }),
  );
  byId<HTMLButtonElement>("export-svg").addEventListener("click", () =>
    guard(async () => {
      if (state.sessionId === null) {
        return;
      }
      download("topology.svg", await client.exportText(state.sessionId, "svg"), "image/svg+xml");
    }),
  );
}

async function boot(): Promise<void> {
  bindScene();
  bindTabs();
  bindBackbone();
  bindClusterPanel();
  bindMetroPanel();
  bindAggregationPanel();
  bindLinkTools();
  bindExports();
  byId<HTMLInputElement>("show-labels").addEventListener("change", draw);
  await guard(async () => {
    const info = await client.createSession();
    update(setSession(state, info.id));
  });
  draw();
}

void boot();
