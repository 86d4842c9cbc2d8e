import assert from "node:assert/strict";
import { writeFileSync } from "node:fs";
import path from "node:path";
import { test } from "node:test";

import { readCheckpoint } from "../src/checkpoint.js";
import { parseSeriesCsv } from "../src/csv.js";
import { SchemaError } from "../src/errors.js";
import { readWeightsJson } from "../src/weightsJson.js";
import { fixture, runCli, tmpDir } from "./util.js";

test("empty series file is a schema error", () => {
  const p = path.join(tmpDir(), "empty.csv");
  writeFileSync(p, "");
  assert.throws(() => parseSeriesCsv(p), SchemaError);
});

test("missing column header is a schema error", () => {
  const p = path.join(tmpDir(), "bad.csv");
  writeFileSync(p, "t,value\n0.0,1.0\n");
  assert.throws(() => parseSeriesCsv(p), SchemaError);
});

test("header without rows is a schema error", () => {
  const p = path.join(tmpDir(), "hdr.csv");
  writeFileSync(p, "t,value,wrapped_flag\n");
  assert.throws(() => parseSeriesCsv(p), SchemaError);
});

test("non-numeric row is a schema error", () => {
  const p = path.join(tmpDir(), "rows.csv");
  writeFileSync(p, "t,value,wrapped_flag\n0.0,oops,0\n");
  assert.throws(() => parseSeriesCsv(p), SchemaError);
});

test("valid fixture parses", () => {
  const s = parseSeriesCsv(fixture("bracket_2_1_p_w0.csv"));
  assert.equal(s.t.length, s.value.length);
  assert.ok(s.t.length >= 20);
  assert.ok(s.value.every((v) => v >= 0));
});

test("bad checkpoint magic is a schema error", () => {
  const p = path.join(tmpDir(), "bad.ckpt");
  writeFileSync(p, Buffer.alloc(64));
  assert.throws(() => readCheckpoint(p), SchemaError);
});

test("weights json without profile is a schema error", () => {
  const p = path.join(tmpDir(), "w.json");
  writeFileSync(p, JSON.stringify({ eps: 0.1, b: 1.0, slope_bound: 1.43 }));
  assert.throws(() => readWeightsJson(p), SchemaError);
});

test("cli exits 2 on schema errors and bad usage", () => {
  const d = tmpDir();
  const empty = path.join(d, "empty.csv");
  writeFileSync(empty, "");
  assert.equal(runCli(["series", "--in", empty, "--out", path.join(d, "o.png")]).status, 2);
  assert.equal(runCli(["nonsense", "--in", empty, "--out", "x.png"]).status, 2);
  assert.equal(runCli(["series", "--out", "x.png"]).status, 2);
  assert.equal(runCli(["series", "--in", fixture("bracket_2_1_p_w0.csv")]).status, 2);
});
