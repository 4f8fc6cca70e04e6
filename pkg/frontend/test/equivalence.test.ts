import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { beforeAll, describe, expect, it } from "vitest";

import {
  CliError,
  convdaArrays,
  encodeBatch,
  InvalidParamsError,
  mixBatchArrays,
  mixPairArrays,
  pythonInterpreter,
  sliceRecord,
  type MixOptions,
} from "../src/index.js";
import { encodeRecord } from "../src/format.js";
import { mixFlags } from "../src/params.js";

// deterministic test-data generator (mulberry32)
function prng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function randomCloud(seed: number, n: number): Float32Array {
  const rand = prng(seed);
  const out = new Float32Array(n * 3);
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.fround(rand() * 2 - 1);
  }
  // scale the farthest point onto the unit sphere
  let maxNorm = 0;
  for (let i = 0; i < n; i++) {
    const norm = Math.hypot(out[3 * i], out[3 * i + 1], out[3 * i + 2]);
    maxNorm = Math.max(maxNorm, norm);
  }
  for (let i = 0; i < out.length; i++) {
    out[i] = Math.fround(out[i] / maxNorm);
  }
  return out;
}

function oneHot(i: number, classes: number): Float32Array {
  const out = new Float32Array(classes);
  out[i % classes] = 1;
  return out;
}

/** Drive the native CLI directly (independent of src/runner.ts plumbing). */
function nativeRecordBytes(
  input: Uint8Array,
  seed: number,
  flags: string[],
  record: number,
): Uint8Array {
  const dir = mkdtempSync(join(tmpdir(), "rsmix-native-"));
  try {
    const inputPath = join(dir, "in.rsmx");
    writeFileSync(inputPath, input);
    execFileSync(pythonInterpreter(), [
      "-m", "rsmix", "mix",
      "--input", inputPath,
      "--format", "batch",
      "--out", join(dir, "out"),
      "--seed", String(seed),
      "--passes", "1",
      "--workers", "1",
      "--pairing", "sequential",
      ...flags,
    ]);
    const bytes = new Uint8Array(readFileSync(join(dir, "out", "pass_0000.rsmx")));
    return sliceRecord(bytes, record);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

beforeAll(() => {
  execFileSync(pythonInterpreter(), ["-m", "rsmix", "--help"], { stdio: "ignore" });
});

describe("binding equivalence", () => {
  it("100 seeded mix calls match native CLI batch records byte-for-byte", () => {
    const n = 64;
    const classes = 5;
    for (let i = 0; i < 100; i++) {
      const seed = 5000 + i;
      const cloudA = randomCloud(2 * i, n);
      const cloudB = randomCloud(2 * i + 1, n);
      const labelA = oneHot(i, classes);
      const labelB = oneHot(i + 1, classes);
      const params: MixOptions = {
        neighborMode: i % 2 === 0 ? "ball" : "knn",
        applyProb: 0.9,
        sizePolicy: "fixed-n",
      };
      const snapshots = [cloudA, labelA, cloudB, labelB].map((b) => b.slice());

      const result = mixPairArrays(cloudA, labelA, cloudB, labelB, params, seed);

      // input buffers were only read
      expect(cloudA).toEqual(snapshots[0]);
      expect(labelA).toEqual(snapshots[1]);
      expect(cloudB).toEqual(snapshots[2]);
      expect(labelB).toEqual(snapshots[3]);

      const input = encodeBatch({
        pointsPerCloud: n,
        classCount: classes,
        records: [
          { coords: cloudA, label: labelA, lambda: 0 },
          { coords: cloudB, label: labelB, lambda: 0 },
        ],
      });
      const native = nativeRecordBytes(input, seed, mixFlags(params), 0);
      const bindingBytes = encodeRecord({
        coords: result.mixed,
        label: result.label,
        lambda: result.lambda,
      });
      expect(Buffer.from(bindingBytes).equals(Buffer.from(native))).toBe(true);
    }
  });

  it("a skipped mix returns the base cloud bitwise", () => {
    const cloud = randomCloud(900, 24);
    const partner = randomCloud(901, 24);
    const result = mixPairArrays(cloud, oneHot(0, 3), partner, oneHot(1, 3), { applyProb: 0 }, 1);
    expect(result.mixed).toEqual(cloud);
    expect(result.lambda).toBe(0);
    expect(result.label).toEqual(oneHot(0, 3));
  });

  it("stacked batch call matches the per-record layout and is deterministic", () => {
    const count = 6;
    const n = 32;
    const classes = 3;
    const clouds = new Float32Array(count * n * 3);
    const labels = new Float32Array(count * classes);
    for (let i = 0; i < count; i++) {
      clouds.set(randomCloud(100 + i, n), i * n * 3);
      labels.set(oneHot(i, classes), i * classes);
    }
    const first = mixBatchArrays(clouds, labels, count, { applyProb: 1.0 }, 7);
    const second = mixBatchArrays(clouds, labels, count, { applyProb: 1.0 }, 7);
    expect(first).toHaveLength(count);
    for (let i = 0; i < count; i++) {
      expect(first[i].mixed).toEqual(second[i].mixed);
      expect(first[i].lambda).toBeGreaterThanOrEqual(0);
      expect(first[i].lambda).toBeLessThanOrEqual(1);
      expect(first[i].mixed.length).toBe(n * 3);
    }
  });
});

describe("conventional augmentation binding", () => {
  it("no stages is a bitwise identity", () => {
    const cloud = randomCloud(42, 48);
    const out = convdaArrays(cloud, { stages: [] }, 3);
    expect(out).toEqual(cloud);
  });

  it("rotation preserves norms", () => {
    const cloud = randomCloud(43, 48);
    const out = convdaArrays(cloud, { stages: ["rotate-y"] }, 4);
    for (let i = 0; i < 48; i++) {
      const before = Math.hypot(cloud[3 * i], cloud[3 * i + 1], cloud[3 * i + 2]);
      const after = Math.hypot(out[3 * i], out[3 * i + 1], out[3 * i + 2]);
      expect(Math.abs(after - before)).toBeLessThan(1e-6);
    }
  });

  it("is deterministic per seed and honors numeric overrides", () => {
    const cloud = randomCloud(44, 32);
    const config = { stages: ["jitter"] as const, jitterSigma: 0.02, jitterClip: 0.03 };
    const a = convdaArrays(cloud, { ...config, stages: [...config.stages] }, 11);
    const b = convdaArrays(cloud, { ...config, stages: [...config.stages] }, 11);
    expect(a).toEqual(b);
    for (let i = 0; i < cloud.length; i++) {
      expect(Math.abs(a[i] - cloud[i])).toBeLessThanOrEqual(0.03 + 1e-7);
    }
  });
});

describe("boundary validation", () => {
  it("rejects mismatched cloud sizes without spawning", () => {
    expect(() =>
      mixPairArrays(randomCloud(1, 8), oneHot(0, 2), randomCloud(2, 9), oneHot(1, 2)),
    ).toThrow(InvalidParamsError);
  });

  it("rejects non-finite coordinates", () => {
    const bad = randomCloud(3, 8);
    bad[5] = Number.POSITIVE_INFINITY;
    expect(() => mixPairArrays(bad, oneHot(0, 2), randomCloud(4, 8), oneHot(1, 2))).toThrow(
      /non-finite/,
    );
  });

  it("rejects invalid mix options", () => {
    expect(() =>
      mixPairArrays(randomCloud(5, 8), oneHot(0, 2), randomCloud(6, 8), oneHot(1, 2), {
        theta: -1,
      }),
    ).toThrow(InvalidParamsError);
  });

  it("surfaces native config rejections as CliError", () => {
    expect(() =>
      mixPairArrays(randomCloud(7, 8), oneHot(0, 2), randomCloud(8, 8), oneHot(1, 2), {
        neighborMode: "ball",
        sizePolicy: "paper",
      }),
    ).toThrow(CliError);
  });
});
