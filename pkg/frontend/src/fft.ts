/** Radix-2 complex FFT (iterative, in place), for spectral-tail figures.
 * Grid sizes written by the solver are powers of two in practice; other
 * sizes are rejected. */

export function fftInPlace(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if ((n & (n - 1)) !== 0) {
    throw new Error(`FFT length ${n} is not a power of two`);
  }
  // bit reversal
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = (-2 * Math.PI) / len;
    const wRe = Math.cos(ang);
    const wIm = Math.sin(ang);
    for (let i = 0; i < n; i += len) {
      let curRe = 1;
      let curIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const ar = re[i + k];
        const ai = im[i + k];
        const br = re[i + k + len / 2] * curRe - im[i + k + len / 2] * curIm;
        const bi = re[i + k + len / 2] * curIm + im[i + k + len / 2] * curRe;
        re[i + k] = ar + br;
        im[i + k] = ai + bi;
        re[i + k + len / 2] = ar - br;
        im[i + k + len / 2] = ai - bi;
        const nRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nRe;
      }
    }
  }
}

/**
 * Root-mean-square x-spectrum over y rows: P_j = sqrt(mean_y |fft_x u|^2),
 * returned for j = 0 .. nx/2.
 */
export function xSpectrumRms(values: Float64Array, nx: number, ny: number): number[] {
  const power = new Float64Array(nx / 2 + 1);
  const re = new Float64Array(nx);
  const im = new Float64Array(nx);
  for (let iy = 0; iy < ny; iy++) {
    for (let ix = 0; ix < nx; ix++) {
      re[ix] = values[ix * ny + iy];
      im[ix] = 0;
    }
    fftInPlace(re, im);
    for (let j = 0; j <= nx / 2; j++) {
      power[j] += re[j] * re[j] + im[j] * im[j];
    }
  }
  return Array.from(power, (p) => Math.sqrt(p / ny));
}
