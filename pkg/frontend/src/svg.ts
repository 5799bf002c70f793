/**
 * Minimal deterministic SVG line charts: linear or log scales, axis ticks,
 * labeled series, optional panel stacking.  No timestamps, no randomness, so
 * re-rendering a job reproduces the file byte for byte.
 */

export interface Series {
  x: number[];
  y: number[];
  label?: string;
  color?: string;
  dash?: string;
  width?: number;
}

export interface PanelSpec {
  series: Series[];
  xLabel: string;
  yLabel: string;
  title?: string;
  logX?: boolean;
  logY?: boolean;
  yTicksOff?: boolean;
  annotations?: string[];
}

const WIDTH = 760;
const PANEL_HEIGHT = 360;
const MARGIN = { top: 34, right: 24, bottom: 52, left: 76 };

function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0";
  return Number(value.toPrecision(6)).toString();
}

function tickValues(lo: number, hi: number, log: boolean): number[] {
  if (log) {
    const ticks: number[] = [];
    const d0 = Math.ceil(Math.log10(lo) - 1e-9);
    const d1 = Math.floor(Math.log10(hi) + 1e-9);
    for (let d = d0; d <= d1; d++) ticks.push(10 ** d);
    if (ticks.length >= 2) return ticks;
    return [lo, hi];
  }
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step = 10 ** Math.floor(Math.log10(span / 4));
  const mult = span / 4 / step;
  const nice = mult >= 5 ? 5 * step : mult >= 2 ? 2 * step : step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / nice) * nice; v <= hi + 1e-12 * span; v += nice) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderPanels(panels: PanelSpec[]): string {
  const height = PANEL_HEIGHT * panels.length;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${height}" viewBox="0 0 ${WIDTH} ${height}">`,
    `<rect width="${WIDTH}" height="${height}" fill="white"/>`,
  ];
  panels.forEach((panel, index) => {
    parts.push(renderPanel(panel, index * PANEL_HEIGHT));
  });
  parts.push("</svg>");
  return parts.join("\n");
}

function renderPanel(panel: PanelSpec, offsetY: number): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = PANEL_HEIGHT - MARGIN.top - MARGIN.bottom;
  const xs = panel.series.flatMap((s) => s.x).filter(Number.isFinite);
  const ys = panel.series.flatMap((s) => s.y).filter(Number.isFinite);
  let xLo = Math.min(...xs);
  let xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (xLo === xHi) {
    xLo -= 1;
    xHi += 1;
  }
  if (yLo === yHi) {
    yLo -= 1;
    yHi += 1;
  }
  if (!panel.logY) {
    const pad = 0.06 * (yHi - yLo);
    yLo -= pad;
    yHi += pad;
  }
  const sx = (v: number) => {
    const t = panel.logX
      ? (Math.log10(v) - Math.log10(xLo)) / (Math.log10(xHi) - Math.log10(xLo))
      : (v - xLo) / (xHi - xLo);
    return MARGIN.left + t * plotW;
  };
  const sy = (v: number) => {
    const t = panel.logY
      ? (Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (v - yLo) / (yHi - yLo);
    return offsetY + MARGIN.top + (1 - t) * plotH;
  };

  const parts: string[] = [];
  const axisY0 = offsetY + MARGIN.top;
  parts.push(
    `<rect x="${MARGIN.left}" y="${axisY0}" width="${plotW}" height="${plotH}" fill="none" stroke="black" stroke-width="1"/>`,
  );
  for (const t of tickValues(xLo, xHi, Boolean(panel.logX))) {
    const x = sx(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(axisY0 + plotH)}" x2="${fmt(x)}" y2="${fmt(axisY0 + plotH + 5)}" stroke="black"/>`,
      `<text x="${fmt(x)}" y="${fmt(axisY0 + plotH + 18)}" font-size="11" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  if (!panel.yTicksOff) {
    for (const t of tickValues(yLo, yHi, Boolean(panel.logY))) {
      const y = sy(t);
      parts.push(
        `<line x1="${fmt(MARGIN.left - 5)}" y1="${fmt(y)}" x2="${fmt(MARGIN.left)}" y2="${fmt(y)}" stroke="black"/>`,
        `<text x="${fmt(MARGIN.left - 8)}" y="${fmt(y + 4)}" font-size="11" text-anchor="end">${fmt(t)}</text>`,
      );
    }
  }
  parts.push(
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${fmt(axisY0 + plotH + 38)}" font-size="13" text-anchor="middle">${escapeXml(panel.xLabel)}</text>`,
    `<text x="${fmt(18)}" y="${fmt(axisY0 + plotH / 2)}" font-size="13" text-anchor="middle" transform="rotate(-90 18 ${fmt(axisY0 + plotH / 2)})">${escapeXml(panel.yLabel)}</text>`,
  );
  if (panel.title) {
    parts.push(
      `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${fmt(axisY0 - 12)}" font-size="14" text-anchor="middle">${escapeXml(panel.title)}</text>`,
    );
  }

  panel.series.forEach((series) => {
    const points: string[] = [];
    for (let i = 0; i < series.x.length; i++) {
      const xv = series.x[i];
      const yv = series.y[i];
      if (!Number.isFinite(xv) || !Number.isFinite(yv)) continue;
      if ((panel.logX && xv <= 0) || (panel.logY && yv <= 0)) continue;
      points.push(`${fmt(sx(xv))},${fmt(sy(yv))}`);
    }
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    parts.push(
      `<polyline class="series" fill="none" stroke="${series.color ?? "black"}" stroke-width="${series.width ?? 1.5}"${dash} points="${points.join(" ")}"/>`,
    );
  });

  const labeled = panel.series.filter((s) => s.label);
  labeled.forEach((series, i) => {
    const y = axisY0 + 16 + 16 * i;
    const x = MARGIN.left + plotW - 180;
    const dash = series.dash ? ` stroke-dasharray="${series.dash}"` : "";
    parts.push(
      `<line class="legend-line" x1="${fmt(x)}" y1="${fmt(y - 4)}" x2="${fmt(x + 26)}" y2="${fmt(y - 4)}" stroke="${series.color ?? "black"}" stroke-width="${series.width ?? 1.5}"${dash}/>`,
      `<text class="legend-label" x="${fmt(x + 32)}" y="${fmt(y)}" font-size="11">${escapeXml(series.label ?? "")}</text>`,
    );
  });
  for (const [i, note] of (panel.annotations ?? []).entries()) {
    parts.push(
      `<text class="annotation" x="${fmt(MARGIN.left + 8)}" y="${fmt(axisY0 + 16 + 16 * i)}" font-size="11">${escapeXml(note)}</text>`,
    );
  }
  return parts.join("\n");
}
