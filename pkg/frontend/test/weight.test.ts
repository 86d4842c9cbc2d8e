import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import path from "node:path";
import { test } from "node:test";

import { readPngSize } from "../src/png.js";
import { readWeightsJson } from "../src/weightsJson.js";
import { fixture, runCli, tmpDir } from "./util.js";

function render(args: string[]): any {
  const d = tmpDir();
  const out = path.join(d, "w.png");
  const metaPath = path.join(d, "w.json");
  const res = runCli([...args, "--out", out, "--meta", metaPath]);
  assert.equal(res.status, 0, res.stderr);
  const size = readPngSize(readFileSync(out));
  const meta = JSON.parse(readFileSync(metaPath, "utf-8"));
  assert.equal(size.width, meta.width);
  assert.equal(size.height, meta.height);
  return meta;
}

test("profile stays inside [0, 1] and the slope bound holds", () => {
  const j = readWeightsJson(fixture("weights_main.json"));
  assert.ok(Math.min(...j.profile.chi0) >= -1e-12);
  assert.ok(Math.max(...j.profile.chi0) <= 1 + 1e-12);
  assert.ok(Math.max(...j.profile.chi1) <= j.slope_bound + 1e-9);
});

test("chi' annotation equals the bound read from the weights json", () => {
  const meta = render(["weight", "--in", fixture("weights_main.json")]);
  const j = readWeightsJson(fixture("weights_main.json"));
  const expected = 1.0 / (j.b - 3.0 * j.eps);
  assert.ok(Math.abs(meta.chi1_bound - expected) <= 1e-12,
    `annotation ${meta.chi1_bound} vs 1/(b-3eps) = ${expected}`);
  assert.ok(meta.chi1_max <= meta.chi1_bound + 1e-9);
  assert.ok(meta.annotation_pixel_y > 0);
});

test("overlay with the cover weight verifies pointwise domination", () => {
  // second input is chi_{eps/5, eps} of the first: it must dominate chi on
  // every shared sample point
  const meta = render(["weight",
                       "--in", fixture("weights_main.json"),
                       "--in", fixture("weights_cover.json")]);
  assert.equal(meta.cover_dominates, true);
  assert.equal(meta.legend.length, 2);
});
