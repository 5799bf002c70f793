/**
 * The five figure jobs.  Each consumes CSV files produced by the simulator
 * CLI and assembles PanelSpecs for the SVG/PNG renderers:
 *
 *   1b  field-amplitude profiles through the medium (final snapshot)
 *   1c  probe pulse frames at successive times, each scaled to its own max
 *   2   group index vs detuning (a) and effective susceptibility (b)
 *   3   cavity buildup profiles, offset by multiples of 0.25
 *   4   bandwidth enhancement vs empty-cavity bandwidth, log-log
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { basename, dirname, join } from "node:path";

import { CsvTable, column, expectColumns, readCsv } from "./csv.js";
import { MissingSeries, SchemaMismatch } from "./errors.js";
import { PanelSpec, Series, renderPanels } from "./svg.js";
import { renderPanelsPng } from "./png.js";

export type FigureId = "1b" | "1c" | "2" | "3" | "4";

export interface FigureJob {
  figure: FigureId;
  inputs: string[];
  output: string;
}

export interface RenderSummary {
  figure: FigureId;
  panels: number;
  seriesCount: number;
  labels: string[];
  logAxes: boolean;
  offsets: number[];
}

const SNAPSHOT_COLUMNS = [
  "z_m",
  "omega31_re", "omega31_im",
  "omega42_re", "omega42_im",
  "omega41_re", "omega41_im",
  "omega32_re", "omega32_im",
];

function magnitude(table: CsvTable, name: string): number[] {
  const re = column(table, `${name}_re`);
  const im = column(table, `${name}_im`);
  return re.map((r, i) => Math.hypot(r, im[i]));
}

function requireRows(table: CsvTable) {
  if (table.rows.length === 0) {
    throw new MissingSeries(`${table.path}: no data rows`);
  }
}

// ---------------------------------------------------------------------------

function figure1b(inputs: string[]): PanelSpec[] {
  if (inputs.length === 0) throw new MissingSeries("figure 1b needs a snapshot CSV");
  const table = readCsv(inputs[0]);
  expectColumns(table, SNAPSHOT_COLUMNS);
  requireRows(table);
  const z = column(table, "z_m");
  const c31 = magnitude(table, "omega31");
  const c42 = magnitude(table, "omega42");
  const probe = magnitude(table, "omega41");
  const generated = magnitude(table, "omega32");
  if (c31[0] === 0 || c42[0] === 0 || probe[0] === 0) {
    throw new MissingSeries(`${table.path}: zero entry amplitude in snapshot`);
  }
  const series: Series[] = [
    { x: z, y: c31.map((v) => v / c31[0]), color: "blue", label: "control fields" },
    { x: z, y: c42.map((v) => v / c42[0]), color: "blue" },
    { x: z, y: probe.map((v) => v / probe[0]), color: "red", dash: "6 3", label: "probe field" },
    { x: z, y: generated.map((v) => v / probe[0]), color: "blue", dash: "2 3", label: "generated field" },
  ];
  return [{
    series,
    xLabel: "z (m)",
    yLabel: "field amplitude / entry value",
    title: "Field evolution through the medium",
  }];
}

// ---------------------------------------------------------------------------

interface SnapshotFrame {
  time: number;
  file: string;
}

export function parseSnapshotIndex(path: string): SnapshotFrame[] {
  const frames: SnapshotFrame[] = [];
  for (const raw of readFileSync(path, "utf8").split(/\r?\n/)) {
    const line = raw.trim();
    if (!line || line.startsWith("#")) continue;
    const parts = line.split(",");
    if (parts[0] === "snapshot") {
      if (parts.join(",") !== "snapshot,time_over_gamma,file") {
        throw new SchemaMismatch(`${path}: unexpected index header ${line}`);
      }
      continue;
    }
    if (parts.length !== 3) {
      throw new SchemaMismatch(`${path}: malformed index row ${line}`);
    }
    frames.push({ time: Number(parts[1]), file: parts[2] });
  }
  if (frames.length === 0) {
    throw new MissingSeries(`${path}: index lists no snapshots`);
  }
  return frames;
}

const ROMAN = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x"];

function figure1c(inputs: string[]): { panels: PanelSpec[]; offsets: number[] } {
  if (inputs.length === 0) throw new MissingSeries("figure 1c needs a snapshot index");
  const indexPath = inputs[0];
  const dir = dirname(indexPath);
  const frames = parseSnapshotIndex(indexPath);
  const series: Series[] = [];
  const annotations: string[] = [];
  const offsets: number[] = [];
  frames.forEach((frame, i) => {
    const table = readCsv(join(dir, frame.file));
    expectColumns(table, SNAPSHOT_COLUMNS);
    requireRows(table);
    const z = column(table, "z_m");
    const intensity = magnitude(table, "omega41").map((v) => v * v);
    const peak = Math.max(...intensity);
    if (peak <= 0) {
      throw new MissingSeries(`${frame.file}: probe intensity is identically zero`);
    }
    const offset = 1.1 * i;
    offsets.push(offset);
    series.push({
      x: z,
      y: intensity.map((v) => v / peak + offset),
      color: "red",
      label: i < ROMAN.length ? `(${ROMAN[i]}) t = ${frame.time.toFixed(1)}` : undefined,
    });
    annotations.push(`(${ROMAN[i] ?? i + 1})`);
  });
  return {
    panels: [{
      series,
      xLabel: "z (m)",
      yLabel: "probe intensity, frame-normalized (offset)",
      title: "Pulse peak at successive times",
      yTicksOff: true,
    }],
    offsets,
  };
}

// ---------------------------------------------------------------------------

function isSuppressed(table: CsvTable): boolean {
  if (table.meta["suppress_4wm"] !== undefined) {
    return table.meta["suppress_4wm"] === "True" || table.meta["suppress_4wm"] === "true";
  }
  return basename(table.path).includes("no4wm");
}

function figure2(inputs: string[]): PanelSpec[] {
  const groupTables: CsvTable[] = [];
  const chiTables: CsvTable[] = [];
  for (const path of inputs) {
    const name = basename(path);
    if (name.startsWith("groupindex")) {
      const table = readCsv(path);
      expectColumns(table, ["delta_over_gamma", "n_g"]);
      requireRows(table);
      groupTables.push(table);
    } else {
      const table = readCsv(path);
      expectColumns(table, ["delta_over_gamma", "chi_re", "chi_im"]);
      requireRows(table);
      chiTables.push(table);
    }
  }
  if (groupTables.length === 0 || chiTables.length === 0) {
    throw new MissingSeries("figure 2 needs group-index and susceptibility CSVs");
  }
  const gSeries: Series[] = groupTables.map((table) => {
    const suppressed = isSuppressed(table);
    const bw = table.meta["bandwidth_gamma"];
    const label = suppressed
      ? "4WM suppressed"
      : `bandwidth ${bw ? Number(bw).toFixed(2) : "?"} gamma`;
    return {
      x: column(table, "delta_over_gamma"),
      y: column(table, "n_g"),
      color: suppressed ? "gray" : "black",
      dash: suppressed ? "6 3" : undefined,
      label,
    };
  });
  const cSeries: Series[] = [];
  for (const table of chiTables) {
    const suppressed = isSuppressed(table);
    const dash = suppressed ? "6 3" : undefined;
    const tag = suppressed ? " (no 4WM)" : " (with 4WM)";
    cSeries.push({
      x: column(table, "delta_over_gamma"),
      y: column(table, "chi_re"),
      color: "blue",
      dash,
      label: "chi'" + tag,
    });
    cSeries.push({
      x: column(table, "delta_over_gamma"),
      y: column(table, "chi_im"),
      color: "red",
      dash,
      label: "chi''" + tag,
    });
  }
  return [
    {
      series: gSeries,
      xLabel: "probe detuning (gamma)",
      yLabel: "group index",
      title: "(a) group index of a Gaussian probe pulse",
    },
    {
      series: cSeries,
      xLabel: "probe detuning (gamma)",
      yLabel: "effective susceptibility",
      title: "(b) effective probe susceptibility",
    },
  ];
}

// ---------------------------------------------------------------------------

function figure3(inputs: string[]): { panels: PanelSpec[]; offsets: number[] } {
  if (inputs.length === 0) throw new MissingSeries("figure 3 needs profile CSVs");
  const series: Series[] = [];
  const offsets: number[] = [];
  inputs.forEach((path, i) => {
    const table = readCsv(path);
    expectColumns(table, ["delta_rad_s", "buildup_normalized"]);
    requireRows(table);
    const gamma0 = Number(table.meta["gamma0_rad_s"] ?? "0");
    const x = column(table, "delta_rad_s").map((v) => (gamma0 > 0 ? v / gamma0 : v));
    const offset = 0.25 * i;
    offsets.push(offset);
    const tag = basename(table.path)
      .replace(/^profile_?/, "")
      .replace(/\.csv$/, "");
    series.push({
      x,
      y: column(table, "buildup_normalized").map((v) => v + offset),
      color: "black",
      label: `(${ROMAN[i] ?? i + 1}) ${tag}`,
    });
  });
  return {
    panels: [{
      series,
      xLabel: "detuning (gamma0)",
      yLabel: "normalized buildup (offset by 0.25)",
      title: "Cavity resonance profiles",
    }],
    offsets,
  };
}

// ---------------------------------------------------------------------------

function figure4(inputs: string[]): PanelSpec[] {
  if (inputs.length === 0) throw new MissingSeries("figure 4 needs scaling CSVs");
  const series: Series[] = [];
  const annotations: string[] = [];
  for (const path of inputs) {
    const table = readCsv(path);
    expectColumns(table, ["gamma0_rad_s", "ratio"]);
    requireRows(table);
    const suppressed = isSuppressed(table);
    const gammaRef = Number(table.meta["gamma_ref_rad_s"] ?? "0");
    const x = column(table, "gamma0_rad_s").map((v) => (gammaRef > 0 ? v / gammaRef : v));
    series.push({
      x,
      y: column(table, "ratio"),
      color: suppressed ? "gray" : "black",
      dash: suppressed ? "6 3" : undefined,
      label: suppressed ? "4WM suppressed" : "full dynamics",
    });
    if (table.meta["slope"] !== undefined) {
      annotations.push(
        `slope ${Number(table.meta["slope"]).toFixed(3)}${suppressed ? " (no 4WM)" : ""}`,
      );
    }
  }
  return [{
    series,
    xLabel: "gamma0 / gamma",
    yLabel: "gamma1 / gamma0",
    title: "Bandwidth enhancement",
    logX: true,
    logY: true,
    annotations,
  }];
}

// ---------------------------------------------------------------------------

export function discoverInputs(figure: FigureId, dir: string): string[] {
  const pick = (...names: string[]) =>
    names.map((n) => join(dir, n)).filter((p) => existsSync(p));
  switch (figure) {
    case "1b": {
      for (let i = 20; i >= 0; i--) {
        const path = join(dir, `snapshot_${String(i).padStart(3, "0")}.csv`);
        if (existsSync(path)) return [path];
      }
      return [];
    }
    case "1c":
      return pick("snapshots_index.csv");
    case "2":
      return pick(
        "groupindex_bw2.csv", "groupindex_bw0.5.csv", "groupindex_bw0.1.csv",
        "groupindex_bw0.5_no4wm.csv",
        "susceptibility.csv", "susceptibility_no4wm.csv",
      );
    case "3":
      // display order follows the published panel: empty, +2%, suppressed,
      // matched, -2%, -4%
      return pick(
        "profile_empty.csv",
        "profile_mismatch+0.02.csv",
        "profile_no4wm.csv",
        "profile_matched.csv",
        "profile_mismatch-0.02.csv",
        "profile_mismatch-0.04.csv",
      );
    case "4":
      return pick("scaling.csv", "scaling_no4wm.csv");
  }
}

export function buildFigure(job: FigureJob): { panels: PanelSpec[]; summary: RenderSummary } {
  let panels: PanelSpec[];
  let offsets: number[] = [];
  switch (job.figure) {
    case "1b":
      panels = figure1b(job.inputs);
      break;
    case "1c": {
      const built = figure1c(job.inputs);
      panels = built.panels;
      offsets = built.offsets;
      break;
    }
    case "2":
      panels = figure2(job.inputs);
      break;
    case "3": {
      const built = figure3(job.inputs);
      panels = built.panels;
      offsets = built.offsets;
      break;
    }
    case "4":
      panels = figure4(job.inputs);
      break;
    default:
      throw new SchemaMismatch(`unknown figure id ${job.figure}`);
  }
  const summary: RenderSummary = {
    figure: job.figure,
    panels: panels.length,
    seriesCount: panels.reduce((n, p) => n + p.series.length, 0),
    labels: panels.flatMap((p) => p.series.map((s) => s.label).filter((l): l is string => !!l)),
    logAxes: panels.some((p) => p.logX || p.logY),
    offsets,
  };
  return { panels, summary };
}

export function render(job: FigureJob): RenderSummary {
  const { panels, summary } = buildFigure(job);
  if (job.output.endsWith(".png")) {
    writeFileSync(job.output, renderPanelsPng(panels));
  } else {
    writeFileSync(job.output, renderPanels(panels));
  }
  return summary;
}
