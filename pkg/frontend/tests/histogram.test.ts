import { describe, expect, it } from "vitest";

import { histogramBars, mapeReadout, renderHistogram, renderStatsPanels } from "../src/histogram.js";

describe("histogramBars", () => {
  it("pairs target and achieved over the union of keys, numerically sorted", () => {
    const bars = histogramBars({ "3": 0.4, "2": 0.6 }, { "2": 0.5, "4": 0.5 });
    expect(bars).toEqual([
      { key: "2", target: 0.6, achieved: 0.5 },
      { key: "3", target: 0.4, achieved: 0 },
      { key: "4", target: 0, achieved: 0.5 },
    ]);
  });

  it("sorts range keys by their lower bound", () => {
    const bars = histogramBars({ "100-200": 0.5, "0-50": 0.3, "50-100": 0.2 }, {});
    expect(bars.map((b) => b.key)).toEqual(["0-50", "50-100", "100-200"]);
  });
});

describe("mapeReadout", () => {
  it("formats as a percentage", () => {
    expect(mapeReadout(0.0511)).toBe("MAPE 5.11 %");
    expect(mapeReadout(0)).toBe("MAPE 0.00 %");
  });

  it("degrades to a dash without a score", () => {
    expect(mapeReadout(null)).toBe("MAPE —");
    expect(mapeReadout(undefined)).toBe("MAPE —");
    expect(mapeReadout(Number.NaN)).toBe("MAPE —");
  });
});

describe("renderHistogram", () => {
  it("draws an outlined target and a filled achieved bar per key", () => {
    const svg = renderHistogram(histogramBars({ "2": 0.6, "3": 0.4 }, { "2": 0.5, "3": 0.5 }));
    expect((svg.match(/class="target"/g) ?? []).length).toBe(2);
    expect((svg.match(/class="achieved"/g) ?? []).length).toBe(2);
    expect(svg).toContain("50.0 / 60.0 %");
  });

  it("shows the title with the readout", () => {
    const svg = renderHistogram([], { title: "Node degrees — MAPE 4.30 %" });
    expect(svg).toContain("Node degrees — MAPE 4.30 %");
  });
});

describe("renderStatsPanels", () => {
  it("renders both panels from one stats payload", () => {
    const svg = renderStatsPanels({
      degree_target: { "2": 1 },
      degree_achieved: { "2": 1 },
      degree_mape: 0,
      degree_other: 0,
      distance_target: { "0-50": 1 },
      distance_achieved: { "0-50": 0.9 },
      distance_mape: 0.1,
      distance_other: 0.1,
    });
    expect(svg).toContain("Node degrees — MAPE 0.00 %");
    expect(svg).toContain("Link lengths (km) — MAPE 10.00 %");
  });
});
