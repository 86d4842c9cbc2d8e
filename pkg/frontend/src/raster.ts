/** Software RGBA raster with the primitives the figures need. */
import { FONT, GLYPH_H, GLYPH_W } from "./font.js";

export type Color = [number, number, number, number]; // RGBA 0..255

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = [255, 255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    this.fill(background);
  }

  fill(c: Color): void {
    for (let i = 0; i < this.width * this.height; i++) {
      this.data.set(c, i * 4);
    }
  }

  set(x: number, y: number, c: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    const a = c[3] / 255;
    if (a >= 1) {
      this.data.set(c, i);
      return;
    }
    for (let k = 0; k < 3; k++) {
      this.data[i + k] = Math.round(c[k] * a + this.data[i + k] * (1 - a));
    }
    this.data[i + 3] = 255;
  }

  get(x: number, y: number): Color {
    const i = (y * this.width + x) * 4;
    return [this.data[i], this.data[i + 1], this.data[i + 2], this.data[i + 3]];
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Color): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, c);
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color, thick = 1): void {
    // Bresenham with optional square pen
    let x = Math.round(x0);
    let y = Math.round(y0);
    const ex = Math.round(x1);
    const ey = Math.round(y1);
    const dx = Math.abs(ex - x);
    const dy = -Math.abs(ey - y);
    const sx = x < ex ? 1 : -1;
    const sy = y < ey ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      if (thick <= 1) {
        this.set(x, y, c);
      } else {
        const r = Math.floor(thick / 2);
        for (let oy = -r; oy <= r; oy++) {
          for (let ox = -r; ox <= r; ox++) {
            this.set(x + ox, y + oy, c);
          }
        }
      }
      if (x === ex && y === ey) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  dashedVLine(x: number, y0: number, y1: number, c: Color, on = 4, off = 3): void {
    for (let y = y0; y < y1; y += on + off) {
      for (let k = 0; k < on && y + k < y1; k++) {
        this.set(x, y + k, c);
      }
    }
  }

  dashedHLine(y: number, x0: number, x1: number, c: Color, on = 4, off = 3): void {
    for (let x = x0; x < x1; x += on + off) {
      for (let k = 0; k < on && x + k < x1; k++) {
        this.set(x + k, y, c);
      }
    }
  }

  text(x: number, y: number, s: string, c: Color, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of s) {
      const glyph = FONT[ch] ?? FONT[ch.toLowerCase()];
      if (glyph) {
        for (let row = 0; row < GLYPH_H; row++) {
          for (let col = 0; col < GLYPH_W; col++) {
            if (glyph[row] & (1 << (GLYPH_W - 1 - col))) {
              if (scale === 1) {
                this.set(cx + col, y + row, c);
              } else {
                this.fillRect(cx + col * scale, y + row * scale, scale, scale, c);
              }
            }
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }
}
