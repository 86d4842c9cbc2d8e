/**
 * Figure builders. Each returns the encoded PNG plus a JSON-able metadata
 * record (dimensions, annotation values, legend entries) that the CLI can
 * write as a sidecar; tests verify annotations from the metadata instead of
 * reading pixels back.
 */
import path from "node:path";

import { linearScale, logScale, formatNumber, type Scale } from "./axes.js";
import type { Checkpoint } from "./checkpoint.js";
import { xNodes } from "./checkpoint.js";
import { SERIES_COLORS, diverging, viridis } from "./colormap.js";
import type { Series } from "./csv.js";
import { derivative } from "./derivatives.js";
import { xSpectrumRms } from "./fft.js";
import { encodePng } from "./png.js";
import { Raster, type Color } from "./raster.js";
import { textWidth } from "./font.js";
import type { WeightProfileJson } from "./weightsJson.js";

const BLACK: Color = [0, 0, 0, 255];
const GREY: Color = [200, 200, 200, 255];
const FLAG_SHADE: Color = [220, 60, 60, 48];
const ANNOT: Color = [200, 40, 40, 255];

export interface Figure {
  png: Buffer;
  meta: Record<string, unknown>;
}

interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

function drawFrame(r: Raster, rc: Rect): void {
  r.line(rc.x, rc.y, rc.x + rc.w, rc.y, BLACK);
  r.line(rc.x, rc.y + rc.h, rc.x + rc.w, rc.y + rc.h, BLACK);
  r.line(rc.x, rc.y, rc.x, rc.y + rc.h, BLACK);
  r.line(rc.x + rc.w, rc.y, rc.x + rc.w, rc.y + rc.h, BLACK);
}

function drawAxes(r: Raster, rc: Rect, sx: Scale, sy: Scale): void {
  drawFrame(r, rc);
  for (const t of sx.ticks()) {
    const px = Math.round(sx.toPixel(t));
    if (px < rc.x || px > rc.x + rc.w) continue;
    r.line(px, rc.y + rc.h, px, rc.y + rc.h + 4, BLACK);
    const label = sx.format(t);
    r.text(px - textWidth(label) / 2, rc.y + rc.h + 7, label, BLACK);
  }
  for (const t of sy.ticks()) {
    const py = Math.round(sy.toPixel(t));
    if (py < rc.y || py > rc.y + rc.h) continue;
    r.line(rc.x - 4, py, rc.x, py, BLACK);
    const label = sy.format(t);
    r.text(rc.x - 6 - textWidth(label), py - 3, label, BLACK);
  }
}

function polyline(r: Raster, xs: number[], ys: number[], sx: Scale, sy: Scale,
                  c: Color): void {
  for (let i = 1; i < xs.length; i++) {
    r.line(sx.toPixel(xs[i - 1]), sy.toPixel(ys[i - 1]),
           sx.toPixel(xs[i]), sy.toPixel(ys[i]), c, 2);
  }
  if (xs.length === 1) {
    r.fillRect(Math.round(sx.toPixel(xs[0])) - 2, Math.round(sy.toPixel(ys[0])) - 2,
               4, 4, c);
  }
}

function seriesLabel(s: Series): string {
  return path.basename(s.path).replace(/\.csv$/, "");
}

function valueRange(list: Series[], logY: boolean): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of list) {
    for (const v of s.value) {
      if (logY && v <= 0) continue;
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  if (!Number.isFinite(lo)) {
    lo = logY ? 1e-3 : 0;
    hi = 1;
  }
  if (lo === hi) {
    lo = logY ? lo / 2 : lo - 1;
    hi = logY ? hi * 2 : hi + 1;
  }
  return [lo, hi];
}

function shadeFlags(r: Raster, rc: Rect, s: Series, sx: Scale): boolean {
  let any = false;
  for (let i = 0; i < s.t.length; i++) {
    if (s.flag[i] !== 1) continue;
    any = true;
    const t0 = i > 0 ? (s.t[i - 1] + s.t[i]) / 2 : s.t[i];
    const t1 = i < s.t.length - 1 ? (s.t[i] + s.t[i + 1]) / 2 : s.t[i];
    const x0 = Math.round(sx.toPixel(t0));
    const x1 = Math.max(Math.round(sx.toPixel(t1)), x0 + 1);
    r.fillRect(x0, rc.y + 1, x1 - x0, rc.h - 1, FLAG_SHADE);
  }
  return any;
}

export interface SeriesOptions {
  width?: number;
  height?: number;
  logY?: boolean;
  overlay?: boolean;
  title?: string;
}

/** One panel per input series (default) or a single overlaid panel; flagged
 * samples become shaded spans. */
export function renderSeries(list: Series[], opts: SeriesOptions = {}): Figure {
  const overlay = opts.overlay ?? false;
  const logY = opts.logY ?? false;
  const width = opts.width ?? 800;
  const nPanels = overlay ? 1 : list.length;
  const panelH = 220;
  const margin = { left: 64, right: 16, top: 28, gap: 36, bottom: 40 };
  const height = opts.height ?? margin.top + nPanels * panelH
    + (nPanels - 1) * margin.gap + margin.bottom;
  const r = new Raster(width, height);
  if (opts.title) {
    r.text(margin.left, 8, opts.title, BLACK);
  }

  const tLo = Math.min(...list.map((s) => s.t[0]));
  const tHi = Math.max(...list.map((s) => s.t[s.t.length - 1]));
  const panels: Record<string, unknown>[] = [];
  const legend: string[] = list.map(seriesLabel);

  const groups: Series[][] = overlay ? [list] : list.map((s) => [s]);
  const innerH = (height - margin.top - margin.bottom - (nPanels - 1) * margin.gap)
    / nPanels;
  groups.forEach((group, pi) => {
    const rc: Rect = {
      x: margin.left,
      y: Math.round(margin.top + pi * (innerH + margin.gap)),
      w: width - margin.left - margin.right,
      h: Math.round(innerH),
    };
    const [vLo, vHi] = valueRange(group, logY);
    const sx = linearScale(tLo, tHi, rc.x, rc.x + rc.w);
    const sy = logY
      ? logScale(vLo, vHi, rc.y + rc.h, rc.y)
      : linearScale(Math.min(vLo, 0) === 0 && vLo >= 0 ? 0 : vLo, vHi,
                    rc.y + rc.h, rc.y);
    drawAxes(r, rc, sx, sy);
    let flagged = false;
    group.forEach((s, si) => {
      flagged = shadeFlags(r, rc, s, sx) || flagged;
      const color = SERIES_COLORS[(overlay ? si : pi) % SERIES_COLORS.length];
      polyline(r, s.t, s.value, sx, sy, color);
      const label = seriesLabel(s);
      const ly = rc.y + 6 + si * 12;
      r.fillRect(rc.x + rc.w - 14 - textWidth(label) - 10, ly + 2, 8, 3, color);
      r.text(rc.x + rc.w - 14 - textWidth(label), ly, label, BLACK);
    });
    panels.push({
      labels: group.map(seriesLabel),
      n: group[0].t.length,
      value_min: Math.min(...group.map((s) => Math.min(...s.value))),
      value_max: Math.max(...group.map((s) => Math.max(...s.value))),
      flagged,
    });
    r.text(rc.x + 4, rc.y + rc.h + 18, "t", BLACK);
  });

  return {
    png: encodePng(width, height, r.data),
    meta: {
      kind: overlay ? "series_overlay" : "series",
      width, height, log_y: logY, legend, panels,
    },
  };
}

/** Tau-sweep overlay: always a single panel, legend entries named by the
 * tau_* directory each CSV came from. */
export function renderTauOverlay(list: Series[], opts: SeriesOptions = {}): Figure {
  const fig = renderSeries(list, { ...opts, overlay: true });
  const legend = list.map((s) => {
    const dir = path.basename(path.dirname(s.path));
    return dir.startsWith("tau") ? dir : seriesLabel(s);
  });
  fig.meta = { ...fig.meta, kind: "tau_overlay", legend };
  return fig;
}

export interface HeatmapOptions {
  width?: number;
  a1?: number;
  a2?: number;
  /** window threshold parameters: a line at x0 + eps - nu * t */
  x0?: number;
  eps?: number;
  nu?: number;
  /** singular abscissa marker */
  xs?: number;
  title?: string;
}

/** Field (or derivative) heatmap with window-edge and singular-line markers. */
export function renderHeatmap(ck: Checkpoint, opts: HeatmapOptions = {}): Figure {
  const a1 = opts.a1 ?? 0;
  const a2 = opts.a2 ?? 0;
  const vals = a1 === 0 && a2 === 0 ? ck.values : derivative(ck, a1, a2);
  const width = opts.width ?? 800;
  const margin = { left: 64, right: 16, top: 28, bottom: 40 };
  const plotW = width - margin.left - margin.right;
  const plotH = Math.max(Math.round((plotW * ck.ny) / ck.nx / 2) * 2, 120);
  const height = margin.top + plotH + margin.bottom;
  const r = new Raster(width, height);

  let lo = Infinity;
  let hi = -Infinity;
  for (const v of vals) {
    lo = Math.min(lo, v);
    hi = Math.max(hi, v);
  }
  const signed = lo < 0;
  const amp = Math.max(Math.abs(lo), Math.abs(hi), 1e-300);
  const span = hi - lo || 1;

  for (let px = 0; px < plotW; px++) {
    const ix = Math.min(Math.floor((px / plotW) * ck.nx), ck.nx - 1);
    for (let py = 0; py < plotH; py++) {
      // image rows run top-down; box y runs bottom-up
      const iy = Math.min(Math.floor(((plotH - 1 - py) / plotH) * ck.ny), ck.ny - 1);
      const v = vals[ix * ck.ny + iy];
      const c = signed ? diverging(0.5 + v / (2 * amp)) : viridis((v - lo) / span);
      r.set(margin.left + px, margin.top + py, c);
    }
  }
  const rc: Rect = { x: margin.left, y: margin.top, w: plotW, h: plotH };
  drawFrame(r, rc);
  const sx = linearScale(-ck.lx / 2, ck.lx / 2, rc.x, rc.x + rc.w);
  for (const t of sx.ticks()) {
    const px = Math.round(sx.toPixel(t));
    r.line(px, rc.y + rc.h, px, rc.y + rc.h + 4, BLACK);
    const label = formatNumber(t);
    r.text(px - textWidth(label) / 2, rc.y + rc.h + 7, label, BLACK);
  }
  if (opts.title) r.text(margin.left, 8, opts.title, BLACK);

  const meta: Record<string, unknown> = {
    kind: "heatmap", width, height, alpha: [a1, a2],
    t: ck.t, nx: ck.nx, ny: ck.ny, lx: ck.lx, ly: ck.ly,
    value_min: lo, value_max: hi,
  };

  // strongest |value| column in box coordinates (ridge locator)
  let best = 0;
  let bestIx = 0;
  for (let ix = 0; ix < ck.nx; ix++) {
    for (let iy = 0; iy < ck.ny; iy++) {
      const a = Math.abs(vals[ix * ck.ny + iy]);
      if (a > best) {
        best = a;
        bestIx = ix;
      }
    }
  }
  meta.argmax_x = xNodes(ck)[bestIx];

  if (opts.x0 !== undefined && opts.eps !== undefined && opts.nu !== undefined) {
    const edge = opts.x0 + opts.eps - opts.nu * ck.t;
    const px = Math.round(sx.toPixel(edge));
    r.dashedVLine(px, rc.y, rc.y + rc.h, ANNOT);
    meta.window_edge = edge;
  }
  if (opts.xs !== undefined) {
    const px = Math.round(sx.toPixel(opts.xs));
    r.dashedVLine(px, rc.y, rc.y + rc.h, BLACK);
    meta.singular_abscissa = opts.xs;
  }
  return { png: encodePng(width, height, r.data), meta };
}

export interface WeightOptions {
  width?: number;
  title?: string;
}

/** chi and chi' profiles from one or more weights JSONs. The chi' panel is
 * annotated with the first weight's slope bound 1/(b - 3 eps). */
export function renderWeight(jsons: WeightProfileJson[], opts: WeightOptions = {}): Figure {
  const width = opts.width ?? 800;
  const margin = { left: 64, right: 16, top: 28, gap: 36, bottom: 40 };
  const panelH = 200;
  const height = margin.top + 2 * panelH + margin.gap + margin.bottom;
  const r = new Raster(width, height);
  if (opts.title) r.text(margin.left, 8, opts.title, BLACK);

  const xLo = Math.min(...jsons.map((j) => j.profile.x[0]));
  const xHi = Math.max(...jsons.map((j) => j.profile.x[j.profile.x.length - 1]));
  const bound = jsons[0].slope_bound;
  const legend = jsons.map((j) => `eps=${formatNumber(j.eps)} b=${formatNumber(j.b)}`);

  const panels: Array<{ key: "chi0" | "chi1"; top: number; vHi: number }> = [
    { key: "chi0", top: margin.top, vHi: 1.05 },
    { key: "chi1", top: margin.top + panelH + margin.gap, vHi: bound * 1.15 },
  ];
  let annotationPixel = 0;
  for (const panel of panels) {
    const rc: Rect = { x: margin.left, y: panel.top, w: width - margin.left - margin.right, h: panelH };
    const sx = linearScale(xLo, xHi, rc.x, rc.x + rc.w);
    const sy = linearScale(0, panel.vHi, rc.y + rc.h, rc.y);
    drawAxes(r, rc, sx, sy);
    jsons.forEach((j, ji) => {
      polyline(r, j.profile.x, j.profile[panel.key], sx, sy,
               SERIES_COLORS[ji % SERIES_COLORS.length]);
      const label = legend[ji];
      r.text(rc.x + rc.w - 12 - textWidth(label), rc.y + 6 + ji * 12, label, BLACK);
    });
    r.text(rc.x + 4, rc.y - 12, panel.key === "chi0" ? "chi" : "chi'", BLACK);
    if (panel.key === "chi1") {
      const py = Math.round(sy.toPixel(bound));
      annotationPixel = py;
      r.dashedHLine(py, rc.x, rc.x + rc.w, ANNOT);
      const label = `1/(b-3 eps) = ${formatNumber(bound)}`;
      r.text(rc.x + 8, py - 10, label, ANNOT);
    }
  }

  // ordering of chi profiles on the shared sample grid (meaningful when the
  // second input is the first one's cover weight chi_{eps/5, eps})
  let orderingOk: boolean | null = null;
  if (jsons.length === 2 &&
      jsons[0].profile.x.length === jsons[1].profile.x.length) {
    orderingOk = jsons[0].profile.chi0.every(
      (v, i) => jsons[1].profile.chi0[i] >= v - 1e-9);
  }

  return {
    png: encodePng(width, height, r.data),
    meta: {
      kind: "weight_profile", width, height, legend,
      chi1_bound: bound, chi1_max: Math.max(...jsons[0].profile.chi1),
      annotation_pixel_y: annotationPixel,
      cover_dominates: orderingOk,
    },
  };
}

export interface TailOptions {
  width?: number;
  height?: number;
  jLo?: number;
  jHi?: number;
  title?: string;
}

/** Log-log x-spectrum of a checkpoint field with a fitted tail slope. */
export function renderTail(ck: Checkpoint, opts: TailOptions = {}): Figure {
  const width = opts.width ?? 800;
  const height = opts.height ?? 420;
  const margin = { left: 64, right: 16, top: 28, bottom: 40 };
  const r = new Raster(width, height);
  if (opts.title) r.text(margin.left, 8, opts.title, BLACK);

  const spec = xSpectrumRms(ck.values, ck.nx, ck.ny);
  const jLo = opts.jLo ?? Math.min(20, Math.floor(ck.nx / 6));
  const jHi = opts.jHi ?? Math.floor(ck.nx / 3);
  const xi = (j: number) => (2 * Math.PI * j) / ck.lx;

  const js: number[] = [];
  const ps: number[] = [];
  for (let j = 1; j <= ck.nx / 2; j++) {
    if (spec[j] > 0) {
      js.push(xi(j));
      ps.push(spec[j]);
    }
  }
  const rc: Rect = { x: margin.left, y: margin.top,
                     w: width - margin.left - margin.right,
                     h: height - margin.top - margin.bottom };
  const sx = logScale(js[0], js[js.length - 1], rc.x, rc.x + rc.w);
  const sy = logScale(Math.min(...ps), Math.max(...ps), rc.y + rc.h, rc.y);
  drawAxes(r, rc, sx, sy);
  polyline(r, js, ps, sx, sy, SERIES_COLORS[0]);

  // least-squares slope in log-log over the fit band
  let sxx = 0;
  let sxy = 0;
  let sxm = 0;
  let sym = 0;
  let n = 0;
  for (let j = jLo; j < jHi; j++) {
    if (spec[j] <= 0) continue;
    const lx = Math.log(xi(j));
    const ly = Math.log(spec[j]);
    sxm += lx;
    sym += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    n++;
  }
  const slope = (sxy - (sxm * sym) / n) / (sxx - (sxm * sxm) / n);
  const intercept = sym / n - slope * (sxm / n);
  const fit = [jLo, jHi].map((j) => Math.exp(intercept + slope * Math.log(xi(j))));
  polyline(r, [xi(jLo), xi(jHi)], fit, sx, sy, ANNOT);
  r.text(rc.x + 8, rc.y + 6, `slope = ${formatNumber(slope)}`, ANNOT);

  return {
    png: encodePng(width, height, r.data),
    meta: { kind: "tail", width, height, slope, fit_band: [jLo, jHi], t: ck.t },
  };
}
