/**
 * Reader for kplab field checkpoints.
 *
 * Layout (little-endian): 8-byte magic "KPLABCK1", uint32 nx, uint32 ny,
 * float64 lx, float64 ly, float64 t, then nx*ny float64 values in C order
 * (x index slow). Node coordinates are x_i = -lx/2 + i lx/nx and
 * y_j = -ly/2 + j ly/ny.
 */
import { readFileSync } from "node:fs";
import { SchemaError } from "./errors.js";

export interface Checkpoint {
  nx: number;
  ny: number;
  lx: number;
  ly: number;
  t: number;
  /** values[ix * ny + iy] */
  values: Float64Array;
}

const MAGIC = "KPLABCK1";
const HEADER_BYTES = 8 + 4 + 4 + 8 + 8 + 8;

export function readCheckpoint(path: string): Checkpoint {
  let buf: Buffer;
  try {
    buf = readFileSync(path);
  } catch (e) {
    throw new SchemaError(`${path}: cannot read (${(e as Error).message})`);
  }
  if (buf.length < HEADER_BYTES || buf.toString("ascii", 0, 8) !== MAGIC) {
    throw new SchemaError(`${path}: not a kplab checkpoint`);
  }
  const nx = buf.readUInt32LE(8);
  const ny = buf.readUInt32LE(12);
  const lx = buf.readDoubleLE(16);
  const ly = buf.readDoubleLE(24);
  const t = buf.readDoubleLE(32);
  const expect = HEADER_BYTES + nx * ny * 8;
  if (buf.length !== expect) {
    throw new SchemaError(`${path}: expected ${expect} bytes, got ${buf.length}`);
  }
  const values = new Float64Array(nx * ny);
  for (let i = 0; i < nx * ny; i++) {
    values[i] = buf.readDoubleLE(HEADER_BYTES + 8 * i);
  }
  return { nx, ny, lx, ly, t, values };
}

export function xNodes(ck: Checkpoint): number[] {
  return Array.from({ length: ck.nx }, (_v, i) => -ck.lx / 2 + (i * ck.lx) / ck.nx);
}

export function yNodes(ck: Checkpoint): number[] {
  return Array.from({ length: ck.ny }, (_v, j) => -ck.ly / 2 + (j * ck.ly) / ck.ny);
}
