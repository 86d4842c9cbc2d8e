/** Periodic 4th-order finite-difference derivatives of checkpoint fields.
 * Figure-grade accuracy: the solver side owns spectral precision. */
import type { Checkpoint } from "./checkpoint.js";

function diffAxis(values: Float64Array, nx: number, ny: number, axis: 0 | 1,
                  h: number): Float64Array {
  const out = new Float64Array(nx * ny);
  const idx = (ix: number, iy: number) =>
    (((ix % nx) + nx) % nx) * ny + (((iy % ny) + ny) % ny);
  for (let ix = 0; ix < nx; ix++) {
    for (let iy = 0; iy < ny; iy++) {
      const at = (o: number) =>
        axis === 0 ? values[idx(ix + o, iy)] : values[idx(ix, iy + o)];
      out[ix * ny + iy] = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
    }
  }
  return out;
}

/** d^a1/dx^a1 d^a2/dy^a2 of the checkpoint field (a1, a2 >= 0). */
export function derivative(ck: Checkpoint, a1: number, a2: number): Float64Array {
  if (a1 < 0 || a2 < 0) {
    throw new Error("derivative orders must be >= 0");
  }
  let v = ck.values;
  const hx = ck.lx / ck.nx;
  const hy = ck.ly / ck.ny;
  for (let k = 0; k < a1; k++) {
    v = diffAxis(v, ck.nx, ck.ny, 0, hx);
  }
  for (let k = 0; k < a2; k++) {
    v = diffAxis(v, ck.nx, ck.ny, 1, hy);
  }
  return v;
}
