/** Axis scaling, tick selection and label formatting. */

export interface Scale {
  toPixel(v: number): number;
  ticks(): number[];
  format(v: number): string;
}

export function formatNumber(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    return v.toExponential(1).replace("e+", "e");
  }
  const s = v.toPrecision(4);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

export function niceTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function linearScale(lo: number, hi: number, pixLo: number, pixHi: number): Scale {
  const span = hi - lo || 1;
  return {
    toPixel: (v) => pixLo + ((v - lo) / span) * (pixHi - pixLo),
    ticks: () => niceTicks(lo, hi),
    format: formatNumber,
  };
}

export function logScale(lo: number, hi: number, pixLo: number, pixHi: number): Scale {
  const llo = Math.log10(Math.max(lo, 1e-300));
  const lhi = Math.log10(Math.max(hi, lo * 10));
  const span = lhi - llo || 1;
  const decades: number[] = [];
  for (let d = Math.ceil(llo); d <= Math.floor(lhi); d++) {
    decades.push(Math.pow(10, d));
  }
  return {
    toPixel: (v) => pixLo + ((Math.log10(Math.max(v, 1e-300)) - llo) / span) * (pixHi - pixLo),
    ticks: () => (decades.length >= 2 ? decades : [lo, hi]),
    format: formatNumber,
  };
}
