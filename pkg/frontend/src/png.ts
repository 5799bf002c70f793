/**
 * PNG fallback: rasterizes the panel series (axes frame plus polylines) into
 * an RGBA buffer and encodes it as a PNG.  Text and ticks are omitted in
 * raster mode; the SVG output remains the primary format.
 */

import { deflateSync } from "node:zlib";

import type { PanelSpec } from "./svg.js";

const WIDTH = 760;
const PANEL_HEIGHT = 360;
const MARGIN = { top: 34, right: 24, bottom: 52, left: 76 };

const COLORS: Record<string, [number, number, number]> = {
  black: [0, 0, 0],
  blue: [31, 73, 164],
  red: [186, 36, 36],
  green: [32, 128, 64],
  gray: [128, 128, 128],
};

class Raster {
  data: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]) {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = 4 * (y * this.width + x);
    this.data[i] = rgb[0];
    this.data[i + 1] = rgb[1];
    this.data[i + 2] = rgb[2];
    this.data[i + 3] = 255;
  }

  line(x0: number, y0: number, x1: number, y1: number, rgb: [number, number, number]) {
    let ix0 = Math.round(x0);
    let iy0 = Math.round(y0);
    const ix1 = Math.round(x1);
    const iy1 = Math.round(y1);
    const dx = Math.abs(ix1 - ix0);
    const dy = -Math.abs(iy1 - iy0);
    const sx = ix0 < ix1 ? 1 : -1;
    const sy = iy0 < iy1 ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(ix0, iy0, rgb);
      if (ix0 === ix1 && iy0 === iy1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ix0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        iy0 += sy;
      }
    }
  }
}

function drawPanel(raster: Raster, panel: PanelSpec, offsetY: number) {
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
  const sx = (v: number) =>
    MARGIN.left +
    plotW *
      (panel.logX
        ? (Math.log10(v) - Math.log10(xLo)) / (Math.log10(xHi) - Math.log10(xLo))
        : (v - xLo) / (xHi - xLo));
  const sy = (v: number) =>
    offsetY +
    MARGIN.top +
    plotH *
      (1 -
        (panel.logY
          ? (Math.log10(v) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
          : (v - yLo) / (yHi - yLo)));

  const frame: [number, number, number] = [0, 0, 0];
  raster.line(MARGIN.left, offsetY + MARGIN.top, MARGIN.left + plotW, offsetY + MARGIN.top, frame);
  raster.line(MARGIN.left, offsetY + MARGIN.top + plotH, MARGIN.left + plotW, offsetY + MARGIN.top + plotH, frame);
  raster.line(MARGIN.left, offsetY + MARGIN.top, MARGIN.left, offsetY + MARGIN.top + plotH, frame);
  raster.line(MARGIN.left + plotW, offsetY + MARGIN.top, MARGIN.left + plotW, offsetY + MARGIN.top + plotH, frame);

  for (const series of panel.series) {
    const rgb = COLORS[series.color ?? "black"] ?? COLORS.black;
    let prev: [number, number] | null = null;
    for (let i = 0; i < series.x.length; i++) {
      const xv = series.x[i];
      const yv = series.y[i];
      if (!Number.isFinite(xv) || !Number.isFinite(yv)) continue;
      if ((panel.logX && xv <= 0) || (panel.logY && yv <= 0)) continue;
      const pt: [number, number] = [sx(xv), sy(yv)];
      if (prev) raster.line(prev[0], prev[1], pt[0], pt[1], rgb);
      prev = pt;
    }
  }
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(data: Uint8Array): number {
  let crc = 0xffffffff;
  for (const byte of data) {
    crc = CRC_TABLE[(crc ^ byte) & 0xff] ^ (crc >>> 8);
  }
  return (crc ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(payload.length, 0);
  head.write(type, 4, "ascii");
  const body = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(payload)]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head, Buffer.from(payload), crc]);
}

export function encodePng(width: number, height: number, rgba: Uint8Array): Buffer {
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  const raw = Buffer.alloc(height * (1 + width * 4));
  for (let y = 0; y < height; y++) {
    raw[y * (1 + width * 4)] = 0; // filter: none
    rgba
      .subarray(y * width * 4, (y + 1) * width * 4)
      .forEach((v, i) => (raw[y * (1 + width * 4) + 1 + i] = v));
  }
  const signature = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  return Buffer.concat([
    signature,
    chunk("IHDR", ihdr),
    chunk("IDAT", deflateSync(raw, { level: 9 })),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function renderPanelsPng(panels: PanelSpec[]): Buffer {
  const raster = new Raster(WIDTH, PANEL_HEIGHT * panels.length);
  panels.forEach((panel, i) => drawPanel(raster, panel, i * PANEL_HEIGHT));
  return encodePng(raster.width, raster.height, raster.data);
}
