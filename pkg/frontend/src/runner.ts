/** Process-level plumbing: invoke the native CLI on a temp workspace. */

import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export class CliError extends Error {}

/** Interpreter override for environments where python3 is not on PATH. */
export function pythonInterpreter(): string {
  return process.env.RSMIX_PYTHON ?? "python3";
}

export function runMixCli(inputBatch: Uint8Array, seed: number, flags: string[]): Uint8Array {
  if (!Number.isInteger(seed) || seed < 0) {
    throw new CliError(`seed must be a non-negative integer, got ${seed}`);
  }
  const workDir = mkdtempSync(join(tmpdir(), "rsmix-client-"));
  try {
    const inputPath = join(workDir, "input.rsmx");
    const outDir = join(workDir, "out");
    writeFileSync(inputPath, inputBatch);
    const argv = [
      "-m", "rsmix", "mix",
      "--input", inputPath,
      "--format", "batch",
      "--out", outDir,
      "--seed", String(seed),
      "--passes", "1",
      "--workers", "1",
      "--pairing", "sequential",
      ...flags,
    ];
    try {
      execFileSync(pythonInterpreter(), argv, { stdio: ["ignore", "ignore", "pipe"] });
    } catch (err) {
      const stderr = (err as { stderr?: Buffer }).stderr?.toString() ?? String(err);
      throw new CliError(`native augmentation run failed: ${stderr.trim()}`);
    }
    return new Uint8Array(readFileSync(join(outDir, "pass_0000.rsmx")));
  } finally {
    rmSync(workDir, { recursive: true, force: true });
  }
}
