import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import { MissingSeries, SchemaMismatch } from "../src/errors.js";
import { buildFigure, discoverInputs, render } from "../src/figures.js";
import { readCsv } from "../src/csv.js";

const SNAPSHOT_HEADER =
  "z_m,omega31_re,omega31_im,omega42_re,omega42_im,omega41_re,omega41_im,omega32_re,omega32_im";

function snapshotCsv(generatedScale: number, points = 21): string {
  const lines = ["# snapshot_time_over_gamma = 3.0", SNAPSHOT_HEADER];
  for (let i = 0; i < points; i++) {
    const z = (0.3 * i) / (points - 1);
    const atten = 1 - 0.3 * (i / (points - 1));
    lines.push(
      [z, 16 * atten, 0, 15.5 * atten, 0, 0.1 * (1 + 0.1 * (i / points)), 0,
       generatedScale * (i / points), 0].join(","),
    );
  }
  return lines.join("\n") + "\n";
}

function curveCsv(suppressed: boolean): string {
  const lines = [
    `# suppress_4wm = ${suppressed ? "True" : "False"}`,
    "delta_over_gamma,chi_re,chi_im",
  ];
  for (let i = 0; i <= 20; i++) {
    const d = -2 + 0.2 * i;
    lines.push([d, -1e-7 * d, -5e-8 * Math.exp(-d * d)].join(","));
  }
  return lines.join("\n") + "\n";
}

function groupIndexCsv(bandwidth: number, suppressed: boolean): string {
  const lines = [
    `# bandwidth_gamma = ${bandwidth}`,
    `# suppress_4wm = ${suppressed ? "True" : "False"}`,
    "delta_over_gamma,n_g",
  ];
  for (let i = 0; i <= 10; i++) {
    const d = -1 + 0.2 * i;
    lines.push([d, -2 * Math.exp(-d * d) * (suppressed ? 1.5 : 1.0)].join(","));
  }
  return lines.join("\n") + "\n";
}

function profileCsv(width: number): string {
  const lines = ["# gamma0_rad_s = 1.583e6", "delta_rad_s,buildup_normalized"];
  for (let i = 0; i <= 40; i++) {
    const d = (-4 + 0.2 * i) * 1.583e6;
    lines.push([d, 1 / (1 + (2 * d / width) ** 2)].join(","));
  }
  return lines.join("\n") + "\n";
}

function scalingCsv(suppressed: boolean): string {
  const lines = [
    `# suppress_4wm = ${suppressed ? "True" : "False"}`,
    "# gamma_ref_rad_s = 9.42e7",
    "gamma0_rad_s,ratio",
  ];
  for (const f of [100, 316, 1000, 3162, 10000]) {
    const g0 = 1.583e9 / f;
    lines.push([g0, 30 * (g0 / 1.583e6) ** (-2 / 3)].join(","));
  }
  lines.push("# slope= -0.6667");
  return lines.join("\n") + "\n";
}

let dir: string;

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "renderfig-"));
  writeFileSync(join(dir, "snapshot_000.csv"), snapshotCsv(0.02));
  writeFileSync(join(dir, "snapshot_001.csv"), snapshotCsv(0.05));
  writeFileSync(join(dir, "snapshot_002.csv"), snapshotCsv(0.08));
  writeFileSync(
    join(dir, "snapshots_index.csv"),
    "# comment\nsnapshot,time_over_gamma,file\n" +
      "0,8.0,snapshot_000.csv\n1,9.0,snapshot_001.csv\n2,10.0,snapshot_002.csv\n",
  );
  writeFileSync(join(dir, "susceptibility.csv"), curveCsv(false));
  writeFileSync(join(dir, "susceptibility_no4wm.csv"), curveCsv(true));
  writeFileSync(join(dir, "groupindex_bw2.csv"), groupIndexCsv(2.0, false));
  writeFileSync(join(dir, "groupindex_bw0.5.csv"), groupIndexCsv(0.5, false));
  writeFileSync(join(dir, "groupindex_bw0.5_no4wm.csv"), groupIndexCsv(0.5, true));
  writeFileSync(join(dir, "profile_empty.csv"), profileCsv(1.583e6));
  writeFileSync(join(dir, "profile_matched.csv"), profileCsv(4.7e7));
  writeFileSync(join(dir, "profile_no4wm.csv"), profileCsv(3.2e7));
  writeFileSync(join(dir, "profile_mismatch+0.02.csv"), profileCsv(3.5e7));
  writeFileSync(join(dir, "profile_mismatch-0.02.csv"), profileCsv(3.4e7));
  writeFileSync(join(dir, "profile_mismatch-0.04.csv"), profileCsv(2.6e7));
  writeFileSync(join(dir, "scaling.csv"), scalingCsv(false));
  writeFileSync(join(dir, "scaling_no4wm.csv"), scalingCsv(true));
});

describe("figure 1b", () => {
  it("renders four paths with three labels", () => {
    const out = join(dir, "fig1b.svg");
    const summary = render({ figure: "1b", inputs: [join(dir, "snapshot_002.csv")], output: out });
    expect(summary.seriesCount).toBe(4);
    expect(summary.labels).toEqual(["control fields", "probe field", "generated field"]);
    const svg = readFileSync(out, "utf8");
    expect((svg.match(/class="series"/g) ?? []).length).toBe(4);
  });

  it("rejects wrong columns", () => {
    const bad = join(dir, "bad1b.csv");
    writeFileSync(bad, "z_m,foo\n0,1\n");
    expect(() => buildFigure({ figure: "1b", inputs: [bad], output: "x.svg" }))
      .toThrow(SchemaMismatch);
  });
});

describe("figure 1c", () => {
  it("stacks one frame per index row, scaled to each frame's max", () => {
    const out = join(dir, "fig1c.svg");
    const summary = render({ figure: "1c", inputs: [join(dir, "snapshots_index.csv")], output: out });
    expect(summary.seriesCount).toBe(3);
    expect(summary.offsets).toEqual([0, 1.1, 2.2]);
    expect(summary.labels[0]).toContain("(i)");
  });

  it("fails cleanly on an empty index", () => {
    const empty = join(dir, "empty_index.csv");
    writeFileSync(empty, "snapshot,time_over_gamma,file\n");
    expect(() => buildFigure({ figure: "1c", inputs: [empty], output: "x.svg" }))
      .toThrow(MissingSeries);
  });
});

describe("figure 2", () => {
  it("draws both panels with the right series split", () => {
    const inputs = discoverInputs("2", dir);
    const { summary } = buildFigure({ figure: "2", inputs, output: "x.svg" });
    expect(summary.panels).toBe(2);
    // 3 group-index curves + (chi', chi'') for each of 2 susceptibility files
    expect(summary.seriesCount).toBe(7);
  });

  it("needs both kinds of input", () => {
    expect(() => buildFigure({
      figure: "2", inputs: [join(dir, "susceptibility.csv")], output: "x.svg",
    })).toThrow(MissingSeries);
  });
});

describe("figure 3", () => {
  it("offsets six profiles by multiples of 0.25", () => {
    const inputs = discoverInputs("3", dir);
    expect(inputs.length).toBe(6);
    const out = join(dir, "fig3.svg");
    const summary = render({ figure: "3", inputs, output: out });
    expect(summary.seriesCount).toBe(6);
    expect(summary.offsets).toEqual([0, 0.25, 0.5, 0.75, 1.0, 1.25]);
    expect(summary.labels[0]).toContain("empty");
  });

  it("rejects an empty profile", () => {
    const empty = join(dir, "profile_degenerate.csv");
    writeFileSync(empty, "delta_rad_s,buildup_normalized\n");
    expect(() => buildFigure({ figure: "3", inputs: [empty], output: "x.svg" }))
      .toThrow(MissingSeries);
  });
});

describe("figure 4", () => {
  it("uses log-log axes and annotates the slope footer", () => {
    const inputs = discoverInputs("4", dir);
    const out = join(dir, "fig4.svg");
    const summary = render({ figure: "4", inputs, output: out });
    expect(summary.logAxes).toBe(true);
    expect(summary.seriesCount).toBe(2);
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("slope -0.667");
  });
});

describe("outputs", () => {
  it("svg rendering is deterministic", () => {
    const a = join(dir, "det_a.svg");
    const b = join(dir, "det_b.svg");
    render({ figure: "3", inputs: discoverInputs("3", dir), output: a });
    render({ figure: "3", inputs: discoverInputs("3", dir), output: b });
    expect(readFileSync(a, "utf8")).toBe(readFileSync(b, "utf8"));
  });

  it("png fallback writes a valid png signature", () => {
    const out = join(dir, "fig4.png");
    render({ figure: "4", inputs: discoverInputs("4", dir), output: out });
    const bytes = readFileSync(out);
    expect([...bytes.subarray(0, 8)]).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    expect(bytes.length).toBeGreaterThan(500);
  });
});

describe("csv reader", () => {
  it("collects metadata and rows", () => {
    const table = readCsv(join(dir, "scaling.csv"));
    expect(table.meta["slope"]).toBe("-0.6667");
    expect(table.columns).toEqual(["gamma0_rad_s", "ratio"]);
    expect(table.rows.length).toBe(5);
  });

  it("flags malformed rows", () => {
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "a,b\n1,notanumber\n");
    expect(() => readCsv(bad)).toThrow(SchemaMismatch);
  });
});
