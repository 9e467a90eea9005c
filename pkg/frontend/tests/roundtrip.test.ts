/** End-to-end checks against a real service instance.
 *
 * A fresh server process is spawned for this file; the tests then drive
 * it exactly the way the browser client does: two-click selection,
 * confirmed mutations, and a re-render from GET /topology after each.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { renderScene, sceneContents } from "../src/render.js";
import {
  applyTopology,
  canAddLink,
  horseshoeEnds,
  initialState,
  setSession,
  toggleNode,
  type ViewState,
} from "../src/state.js";

const PORT = 18000 + Math.floor(Math.random() * 20000);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "optinetgen.cli", "serve", "--host", "127.0.0.1", "--port", String(PORT)],
    { stdio: "ignore" },
  );
  const deadline = Date.now() + 45_000;
  for (;;) {
    try {
      const res = await fetch(`${BASE}/openapi.json`);
      if (res.ok) {
        return;
      }
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      throw new Error(`service did not come up on ${BASE}`);
    }
    await new Promise((r) => setTimeout(r, 250));
  }
});

afterAll(async () => {
  server.kill("SIGTERM");
  await new Promise<void>((resolve) => {
    server.once("exit", () => resolve());
    setTimeout(resolve, 5_000).unref();
  });
});

/** Re-fetch the topology and fold it into the view, as the UI does. */
async function refresh(client: Client, state: ViewState): Promise<ViewState> {
  return applyTopology(state, await client.topology(state.sessionId as string));
}

/** Assert the rendered scene shows exactly the server's node/link sets. */
function expectSceneMatchesServer(state: ViewState): void {
  const svg = renderScene(state.topology, { selection: state.selection });
  const contents = sceneContents(state.topology);
  for (const name of contents.nodes) {
    expect(svg).toContain(`data-node="${name}"`);
  }
  for (const key of contents.links) {
    expect(svg).toContain(`data-link="${key}"`);
  }
  expect((svg.match(/data-node="/g) ?? []).length).toBe(contents.nodes.size);
  expect((svg.match(/data-link="/g) ?? []).length).toBe(contents.links.size);
}

describe("link edit round trip", () => {
  it("adding then deleting a link leaves the export byte-identical", async () => {
    const client = new Client(BASE);
    const session = (await client.createSession(5)).id;
    await client.generateBackbone(session, "twin", { nodes: 6, seed: 5, layout: "spring" });
    let state = await refresh(client, setSession(initialState(), session));
    expect(state.topology.nodes.length).toBe(6);
    expectSceneMatchesServer(state);

    const pre = await client.exportText(session, "json");

    // two-click an unlinked pair, exactly as the scene handler would
    const names = state.topology.nodes.map((n) => n.name);
    let pair: [string, string] | null = null;
    outer: for (const a of names) {
      for (const b of names) {
        if (a >= b) {
          continue;
        }
        const picked = toggleNode(toggleNode(state, a), b);
        if (canAddLink(picked)) {
          state = picked;
          pair = [a, b];
          break outer;
        }
      }
    }
    expect(pair).not.toBeNull();
    const [a, b] = pair as [string, string];

    await client.addLink(session, a, b, 12.5);
    state = await refresh(client, state);
    expect(sceneContents(state.topology).links.has(`${a}|${b}`)).toBe(true);
    expectSceneMatchesServer(state);

    await client.deleteLink(session, a, b);
    state = await refresh(client, state);
    expect(sceneContents(state.topology).links.has(`${a}|${b}`)).toBe(false);
    expectSceneMatchesServer(state);

    const post = await client.exportText(session, "json");
    expect(post).toBe(pre);
  });

  it("undo also restores the previous export exactly", async () => {
    const client = new Client(BASE);
    const session = (await client.createSession(11)).id;
    await client.generateBackbone(session, "default", { nodes: 8, seed: 11 });
    const pre = await client.exportText(session, "json");
    const topo = await client.topology(session);
    const [first, second] = topo.nodes.map((n) => n.name);
    const unlinked = topo.nodes
      .map((n) => n.name)
      .find(
        (name) =>
          name !== first &&
          !topo.links.some(
            (l) =>
              (l.source === first && l.target === name) ||
              (l.source === name && l.target === first),
          ),
      );
    const other = unlinked ?? (second as string);
    await client.addLink(session, first as string, other, 7).catch(() => undefined);
    await client.undo(session);
    expect(await client.exportText(session, "json")).toBe(pre);
  });
});

describe("metro workflow", () => {
  it("a horseshoe from two selected metro nodes has hops + 1 nodes", async () => {
    const client = new Client(BASE);
    const session = (await client.createSession(3)).id;
    await client.generateBackbone(session, "twin", { nodes: 6, seed: 3, layout: "spring" });

    const clusters = await client.assignClusters(session, {
      epsilon: 0.3,
      avoid_single: true,
    });
    expect(Object.keys(clusters.clusters).length).toBe(3);

    const metro = await client.generateMetro(session, {
      cluster_label: 0,
      kind: "nring",
      params: { nrings: 1 },
    });
    expect(metro.structure_id).toMatch(/^ring-/);

    let state = await refresh(client, setSession(initialState(), session));
    expectSceneMatchesServer(state);
    const members = metro.nodes.filter((n) => n.type !== "amplifier").map((n) => n.name);
    expect(members.length).toBeGreaterThanOrEqual(2);
    state = toggleNode(toggleNode(state, members[0] as string), members[1] as string);
    const ends = horseshoeEnds(state);
    expect(ends).not.toBeNull();

    const hops = 4;
    const shoe = await client.generateHorseshoe(session, {
      end1: (ends as [string, string])[0],
      end2: (ends as [string, string])[1],
      hops,
    });
    expect(shoe.nodes.length).toBe(hops + 1);
    expect(shoe.links.length).toBe(hops);

    state = await refresh(client, state);
    expectSceneMatchesServer(state);
    for (const node of shoe.nodes) {
      expect(state.topology.nodes.some((r) => r.name === node.name)).toBe(true);
    }
  });
});

describe("error surfacing", () => {
  it("maps service errors to status and machine-readable code", async () => {
    const client = new Client(BASE);
    const session = (await client.createSession(1)).id;
    await client.generateBackbone(session, "default", { nodes: 6, seed: 1 });
    const topo = await client.topology(session);
    const name = topo.nodes[0]?.name as string;

    await expect(
      client.generateHorseshoe(session, { end1: name, end2: name, hops: 3 }),
    ).rejects.toMatchObject({ status: 422, code: "invalid-params" });

    await expect(client.topology("nope")).rejects.toMatchObject({
      status: 404,
      code: "unknown-session",
    });

    await expect(
      client.generateBackbone(session, "twin", { nodes: 7 }),
    ).rejects.toMatchObject({ status: 422, code: "invalid-params" });
  });
});
