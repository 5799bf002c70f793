/**
 * Reader for wlcsim CSV files: `# key = value` metadata lines, one header
 * row naming the columns, numeric data rows, and optionally trailing comment
 * lines (the scaling files carry a `# slope=` footer).
 */

import { readFileSync } from "node:fs";

import { SchemaMismatch } from "./errors.js";

export interface CsvTable {
  path: string;
  columns: string[];
  rows: number[][];
  meta: Record<string, string>;
}

export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const meta: Record<string, string> = {};
  const rows: number[][] = [];
  let columns: string[] | null = null;
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (!line) continue;
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      if (eq > 0) {
        meta[line.slice(1, eq).trim()] = line.slice(eq + 1).trim();
      }
      continue;
    }
    if (columns === null) {
      columns = line.split(",").map((c) => c.trim());
      continue;
    }
    const values = line.split(",").map(Number);
    if (values.length !== columns.length || values.some((v) => Number.isNaN(v))) {
      throw new SchemaMismatch(`${path}: malformed data row ${JSON.stringify(raw)}`);
    }
    rows.push(values);
  }
  if (columns === null) {
    throw new SchemaMismatch(`${path}: no column header found`);
  }
  return { path, columns, rows, meta };
}

/** Assert the table carries exactly these columns (order included). */
export function expectColumns(table: CsvTable, expected: string[]): void {
  if (
    table.columns.length !== expected.length ||
    expected.some((c, i) => table.columns[i] !== c)
  ) {
    throw new SchemaMismatch(
      `${table.path}: expected columns ${expected.join(",")}, got ${table.columns.join(",")}`,
    );
  }
}

export function column(table: CsvTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaMismatch(`${table.path}: missing column ${name}`);
  }
  return table.rows.map((r) => r[idx]);
}
