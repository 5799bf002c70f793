#!/usr/bin/env node
/**
 * render-figures --fig ID --in DIR --out PATH [--inputs a.csv,b.csv]
 *
 * Renders one of the figure jobs (1b, 1c, 2, 3, 4) from the simulator's CSV
 * outputs.  Inputs are discovered in DIR by their conventional names unless
 * --inputs lists them explicitly.  The output is SVG, or PNG when PATH ends
 * in .png.
 */

import { discoverInputs, FigureId, render } from "./figures.js";
import { MissingSeries, SchemaMismatch } from "./errors.js";

function parseArgs(argv: string[]): { fig: FigureId; dir: string; out: string; inputs?: string[] } {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key?.startsWith("--") || value === undefined) {
      throw new Error(`cannot parse arguments near ${key ?? "end of line"}`);
    }
    args[key.slice(2)] = value;
  }
  const fig = args["fig"];
  if (!fig || !["1b", "1c", "2", "3", "4"].includes(fig)) {
    throw new Error(`--fig must be one of 1b, 1c, 2, 3, 4 (got ${fig ?? "nothing"})`);
  }
  if (!args["out"]) throw new Error("--out PATH is required");
  if (!args["in"] && !args["inputs"]) throw new Error("--in DIR (or --inputs) is required");
  return {
    fig: fig as FigureId,
    dir: args["in"] ?? ".",
    out: args["out"],
    inputs: args["inputs"]?.split(",").filter(Boolean),
  };
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const inputs = parsed.inputs ?? discoverInputs(parsed.fig, parsed.dir);
    const summary = render({ figure: parsed.fig, inputs, output: parsed.out });
    console.log(
      `wrote ${parsed.out}: figure ${summary.figure}, ${summary.seriesCount} series` +
        (summary.logAxes ? ", log axes" : ""),
    );
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof MissingSeries) {
      console.error(`${err.name}: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
