import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import path from "node:path";
import { test } from "node:test";

import { fixture, runCli, tmpDir } from "./util.js";

test("re-rendering produces byte-identical images", () => {
  // no timestamps or ancillary chunks are embedded, so figures are
  // reproducible bit for bit
  const d = tmpDir();
  const a = path.join(d, "a.png");
  const b = path.join(d, "b.png");
  for (const [kind, input, out] of [
    ["series", fixture("bracket_2_1_p_w0.csv"), a],
    ["series", fixture("bracket_2_1_p_w0.csv"), b],
  ] as const) {
    assert.equal(runCli([kind, "--in", input, "--out", out]).status, 0);
  }
  assert.ok(readFileSync(a).equals(readFileSync(b)));

  const ha = path.join(d, "ha.png");
  const hb = path.join(d, "hb.png");
  for (const out of [ha, hb]) {
    assert.equal(
      runCli(["heatmap", "--in", fixture("rough.ckpt"), "--out", out]).status, 0);
  }
  assert.ok(readFileSync(ha).equals(readFileSync(hb)));
});
