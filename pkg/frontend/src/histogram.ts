/** Target-vs-achieved histogram panel with an error readout. */

import type { StatsPayload } from "./api.js";

export interface Bar {
  key: string;
  target: number;
  achieved: number;
}

/** Pair up proportions over the union of keys, numeric keys first in order. */
export function histogramBars(
  target: Record<string, number>,
  achieved: Record<string, number>,
): Bar[] {
  const keys = [...new Set([...Object.keys(target), ...Object.keys(achieved)])];
  keys.sort((a, b) => {
    const na = Number(a.split("-")[0]);
    const nb = Number(b.split("-")[0]);
    if (Number.isFinite(na) && Number.isFinite(nb)) {
      return na - nb;
    }
    return a < b ? -1 : a > b ? 1 : 0;
  });
  return keys.map((key) => ({ key, target: target[key] ?? 0, achieved: achieved[key] ?? 0 }));
}

/** "MAPE 5.11 %" or an em dash when no score is available. */
export function mapeReadout(mape: number | null | undefined): string {
  if (mape === null || mape === undefined || !Number.isFinite(mape)) {
    return "MAPE —";
  }
  return `MAPE ${(100 * mape).toFixed(2)} %`;
}

export interface HistogramOptions {
  width?: number;
  barHeight?: number;
  title?: string;
}

/** Render paired horizontal bars (target outlined, achieved filled). */
export function renderHistogram(bars: Bar[], opts: HistogramOptions = {}): string {
  const width = opts.width ?? 320;
  const barHeight = opts.barHeight ?? 14;
  const labelWidth = 70;
  const rowGap = 6;
  const rowHeight = 2 * barHeight + rowGap;
  const top = opts.title ? 22 : 6;
  const height = top + bars.length * rowHeight + 6;
  const maxValue = Math.max(0.0001, ...bars.map((b) => Math.max(b.target, b.achieved)));
  const scale = (width - labelWidth - 60) / maxValue;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" width="${width}" height="${height}">`,
  ];
  if (opts.title) {
    parts.push(`<text x="4" y="14" font-size="12" font-weight="bold">${opts.title}</text>`);
  }
  bars.forEach((bar, i) => {
    const y = top + i * rowHeight;
    parts.push(`<text x="4" y="${y + barHeight + 2}" font-size="10">${bar.key}</text>`);
    parts.push(
      `<rect class="target" x="${labelWidth}" y="${y}" width="${(bar.target * scale).toFixed(1)}" ` +
        `height="${barHeight}" fill="none" stroke="#1f77b4"/>`,
    );
    parts.push(
      `<rect class="achieved" x="${labelWidth}" y="${y + barHeight}" width="${(bar.achieved * scale).toFixed(1)}" ` +
        `height="${barHeight}" fill="#ff7f0e"/>`,
    );
    parts.push(
      `<text x="${labelWidth + Math.max(bar.target, bar.achieved) * scale + 4}" y="${y + barHeight + 2}" ` +
        `font-size="9">${(100 * bar.achieved).toFixed(1)} / ${(100 * bar.target).toFixed(1)} %</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}

/** Both panels plus readouts from one stats response. */
export function renderStatsPanels(stats: StatsPayload): string {
  const degree = renderHistogram(histogramBars(stats.degree_target, stats.degree_achieved), {
    title: `Node degrees — ${mapeReadout(stats.degree_mape)}`,
  });
  const distance = renderHistogram(histogramBars(stats.distance_target, stats.distance_achieved), {
    title: `Link lengths (km) — ${mapeReadout(stats.distance_mape)}`,
  });
  return `${degree}\n${distance}`;
}
