/** Reader for the JSON emitted by `kplab weights check --profile`. */
import { readFileSync } from "node:fs";
import { SchemaError } from "./errors.js";

export interface WeightProfileJson {
  eps: number;
  b: number;
  slope_bound: number;
  all_ok: boolean;
  profile: {
    x: number[];
    chi0: number[];
    chi1: number[];
    chi2: number[];
    chi3: number[];
  };
}

export function readWeightsJson(path: string): WeightProfileJson {
  let data: unknown;
  try {
    data = JSON.parse(readFileSync(path, "utf-8"));
  } catch (e) {
    throw new SchemaError(`${path}: cannot parse JSON (${(e as Error).message})`);
  }
  const d = data as Record<string, unknown>;
  for (const key of ["eps", "b", "slope_bound"]) {
    if (typeof d[key] !== "number") {
      throw new SchemaError(`${path}: missing numeric field '${key}'`);
    }
  }
  const profile = d["profile"] as Record<string, unknown> | undefined;
  if (!profile) {
    throw new SchemaError(
      `${path}: no 'profile' field (run kplab weights check with --profile)`);
  }
  for (const key of ["x", "chi0", "chi1", "chi2", "chi3"]) {
    const arr = profile[key];
    if (!Array.isArray(arr) || arr.length === 0) {
      throw new SchemaError(`${path}: profile.${key} missing or empty`);
    }
  }
  const p = profile as unknown as WeightProfileJson["profile"];
  if (new Set([p.x.length, p.chi0.length, p.chi1.length, p.chi2.length,
               p.chi3.length]).size !== 1) {
    throw new SchemaError(`${path}: profile arrays have mismatched lengths`);
  }
  return d as unknown as WeightProfileJson;
}
