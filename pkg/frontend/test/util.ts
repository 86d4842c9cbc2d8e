import { execFileSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { fileURLToPath } from "node:url";

const here = path.dirname(fileURLToPath(import.meta.url));
// compiled tests live in dist/test/; fixtures stay in the source tree
export const FIXTURES = path.resolve(here, "../../test/fixtures");
export const CLI = path.resolve(here, "../src/cli.js");

export function fixture(name: string): string {
  return path.join(FIXTURES, name);
}

export function tmpDir(): string {
  return mkdtempSync(path.join(tmpdir(), "kplab-plot-"));
}

export interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

export function runCli(args: string[]): CliResult {
  try {
    const stdout = execFileSync(process.execPath, [CLI, ...args], {
      encoding: "utf-8",
    });
    return { status: 0, stdout, stderr: "" };
  } catch (e) {
    const err = e as { status?: number; stdout?: string; stderr?: string };
    return {
      status: err.status ?? 1,
      stdout: err.stdout?.toString() ?? "",
      stderr: err.stderr?.toString() ?? "",
    };
  }
}
