#!/usr/bin/env node
/**
 * kplab-plot: turn kplab CSV/checkpoint/JSON outputs into PNG figures.
 *
 *   kplab-plot series   --in A.csv [--in B.csv ...] [--overlay] [--log-y]
 *   kplab-plot tau-overlay --in tau_0.2/x.csv --in tau_0.1/x.csv ...
 *   kplab-plot heatmap  --in field.ckpt [--alpha a1,a2] [--x0 V --eps V --nu V] [--xs V]
 *   kplab-plot weight   --in weights.json [--in cover.json]
 *   kplab-plot tail     --in field.ckpt [--j-lo N --j-hi N]
 *
 * Common: --out FIG.png (required), --meta META.json, --width N, --title S.
 * Exit codes: 0 success, 2 schema/usage error.
 */
import { writeFileSync } from "node:fs";
import process from "node:process";

import { readCheckpoint } from "./checkpoint.js";
import { parseSeriesCsv } from "./csv.js";
import { SchemaError } from "./errors.js";
import {
  renderHeatmap,
  renderSeries,
  renderTail,
  renderTauOverlay,
  renderWeight,
  type Figure,
} from "./figures.js";
import { readWeightsJson } from "./weightsJson.js";

interface Args {
  kind: string;
  inputs: string[];
  out?: string;
  meta?: string;
  flags: Map<string, string | boolean>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new SchemaError("usage: kplab-plot <series|tau-overlay|heatmap|weight|tail> --in ... --out FIG.png");
  }
  const [kind, ...rest] = argv;
  const args: Args = { kind, inputs: [], flags: new Map() };
  for (let i = 0; i < rest.length; i++) {
    const a = rest[i];
    if (!a.startsWith("--")) {
      throw new SchemaError(`unexpected argument '${a}'`);
    }
    const name = a.slice(2);
    if (name === "log-y" || name === "overlay") {
      args.flags.set(name, true);
      continue;
    }
    const val = rest[++i];
    if (val === undefined) {
      throw new SchemaError(`missing value for --${name}`);
    }
    if (name === "in") args.inputs.push(val);
    else if (name === "out") args.out = val;
    else if (name === "meta") args.meta = val;
    else args.flags.set(name, val);
  }
  if (args.inputs.length === 0) throw new SchemaError("at least one --in is required");
  if (!args.out) throw new SchemaError("--out is required");
  return args;
}

function num(args: Args, name: string): number | undefined {
  const v = args.flags.get(name);
  if (v === undefined) return undefined;
  const x = Number(v);
  if (!Number.isFinite(x)) throw new SchemaError(`--${name} must be numeric`);
  return x;
}

function buildFigure(args: Args): Figure {
  const width = num(args, "width");
  const title = args.flags.get("title") as string | undefined;
  switch (args.kind) {
    case "series":
      return renderSeries(args.inputs.map(parseSeriesCsv), {
        width,
        title,
        logY: args.flags.get("log-y") === true,
        overlay: args.flags.get("overlay") === true,
        height: num(args, "height"),
      });
    case "tau-overlay":
      return renderTauOverlay(args.inputs.map(parseSeriesCsv), {
        width, title, logY: args.flags.get("log-y") === true,
        height: num(args, "height"),
      });
    case "heatmap": {
      if (args.inputs.length !== 1) {
        throw new SchemaError("heatmap takes exactly one --in checkpoint");
      }
      let a1 = 0;
      let a2 = 0;
      const alpha = args.flags.get("alpha") as string | undefined;
      if (alpha) {
        const parts = alpha.split(",").map(Number);
        if (parts.length !== 2 || parts.some((p) => !Number.isInteger(p) || p < 0)) {
          throw new SchemaError("--alpha must be 'a1,a2' with nonnegative integers");
        }
        [a1, a2] = parts;
      }
      return renderHeatmap(readCheckpoint(args.inputs[0]), {
        width, title, a1, a2,
        x0: num(args, "x0"), eps: num(args, "eps"), nu: num(args, "nu"),
        xs: num(args, "xs"),
      });
    }
    case "weight":
      return renderWeight(args.inputs.map(readWeightsJson), { width, title });
    case "tail": {
      if (args.inputs.length !== 1) {
        throw new SchemaError("tail takes exactly one --in checkpoint");
      }
      return renderTail(readCheckpoint(args.inputs[0]), {
        width, title, height: num(args, "height"),
        jLo: num(args, "j-lo"), jHi: num(args, "j-hi"),
      });
    }
    default:
      throw new SchemaError(`unknown figure kind '${args.kind}'`);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const fig = buildFigure(args);
    writeFileSync(args.out!, fig.png);
    if (args.meta) {
      writeFileSync(args.meta, JSON.stringify(fig.meta, null, 2) + "\n");
    }
    process.stdout.write(`wrote ${args.out}\n`);
    return 0;
  } catch (e) {
    if (e instanceof SchemaError) {
      process.stderr.write(`${e.name}: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
}

const isDirect = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "");
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
