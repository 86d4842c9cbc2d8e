import assert from "node:assert/strict";
import { test } from "node:test";
import { inflateSync } from "node:zlib";

import { encodePng, readPngSize } from "../src/png.js";

test("png size roundtrip", () => {
  const rgba = new Uint8Array(7 * 5 * 4).fill(128);
  const png = encodePng(7, 5, rgba);
  assert.deepEqual(readPngSize(png), { width: 7, height: 5 });
});

test("idat inflates to filtered scanlines", () => {
  const w = 3;
  const h = 2;
  const rgba = new Uint8Array(w * h * 4);
  for (let i = 0; i < rgba.length; i++) rgba[i] = i;
  const png = encodePng(w, h, rgba);
  // IHDR chunk is 8(sig) + 4+4+13+4 bytes; IDAT follows
  const idatLen = png.readUInt32BE(33);
  assert.equal(png.toString("ascii", 37, 41), "IDAT");
  const raw = inflateSync(png.subarray(41, 41 + idatLen));
  assert.equal(raw.length, h * (1 + w * 4));
  assert.equal(raw[0], 0); // filter byte
  assert.deepEqual([...raw.subarray(1, 5)], [0, 1, 2, 3]);
});

test("size mismatch rejected", () => {
  assert.throws(() => encodePng(4, 4, new Uint8Array(3)));
});

test("non-png rejected by reader", () => {
  assert.throws(() => readPngSize(Buffer.from("definitely not a png")));
});
