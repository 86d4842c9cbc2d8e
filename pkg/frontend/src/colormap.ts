/** Color ramps for heatmaps: a viridis-like sequential map and a blue-white-red
 * diverging map for signed fields. */
import type { Color } from "./raster.js";

const VIRIDIS: [number, number, number][] = [
  [68, 1, 84], [71, 24, 106], [72, 45, 125], [69, 65, 134],
  [62, 84, 138], [55, 101, 140], [48, 117, 142], [42, 132, 142],
  [37, 147, 140], [34, 162, 135], [40, 176, 125], [59, 190, 111],
  [88, 202, 91], [127, 212, 65], [173, 220, 48], [222, 225, 42],
  [253, 231, 37],
];

function lerpTable(table: [number, number, number][], t: number): Color {
  const x = Math.min(Math.max(t, 0), 1) * (table.length - 1);
  const i = Math.min(Math.floor(x), table.length - 2);
  const f = x - i;
  const a = table[i];
  const b = table[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
    255,
  ];
}

export function viridis(t: number): Color {
  return lerpTable(VIRIDIS, t);
}

/** Diverging map centered at t = 0.5 (blue .. white .. red). */
export function diverging(t: number): Color {
  const x = Math.min(Math.max(t, 0), 1);
  if (x < 0.5) {
    const f = x / 0.5;
    return [Math.round(33 + f * (255 - 33)), Math.round(102 + f * (255 - 102)),
            Math.round(172 + f * (255 - 172)), 255];
  }
  const f = (x - 0.5) / 0.5;
  return [Math.round(255 - f * (255 - 178)), Math.round(255 - f * (255 - 24)),
          Math.round(255 - f * (255 - 43)), 255];
}

export const SERIES_COLORS: Color[] = [
  [31, 119, 180, 255],
  [255, 127, 14, 255],
  [44, 160, 44, 255],
  [214, 39, 40, 255],
  [148, 103, 189, 255],
  [140, 86, 75, 255],
];
