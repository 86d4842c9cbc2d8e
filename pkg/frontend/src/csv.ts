/** Readers for the bracket/functional series CSVs the runner emits. */
import { readFileSync } from "node:fs";
import { SchemaError } from "./errors.js";

export interface Series {
  path: string;
  t: number[];
  value: number[];
  flag: number[];
}

const HEADER = "t,value,wrapped_flag";

export function parseSeriesCsv(path: string): Series {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (e) {
    throw new SchemaError(`${path}: cannot read (${(e as Error).message})`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty series file`);
  }
  if (lines[0] !== HEADER) {
    throw new SchemaError(`${path}: header must be '${HEADER}', got '${lines[0]}'`);
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const t: number[] = [];
  const value: number[] = [];
  const flag: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 3) {
      throw new SchemaError(`${path}:${i + 1}: expected 3 columns, got ${parts.length}`);
    }
    const [tv, vv, fv] = parts.map(Number);
    if (!Number.isFinite(tv) || !Number.isFinite(vv) || !(fv === 0 || fv === 1)) {
      throw new SchemaError(`${path}:${i + 1}: non-numeric row '${lines[i]}'`);
    }
    t.push(tv);
    value.push(vv);
    flag.push(fv);
  }
  return { path, t, value, flag };
}
