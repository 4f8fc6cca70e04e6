/**
 * Array-in/array-out access to the point-cloud mixing augmentation for
 * data-pipeline consumers.
 *
 * Calls delegate to the native CLI through its stable byte surface (the
 * `RSMX1` batch container plus the documented flag set; both are versioned
 * by the container magic), so every result is bit-identical to a native
 * batch record produced with the same seed and inputs. Input buffers are
 * only ever read. Per-call process startup dominates a single mix; use the
 * stacked-batch variant to amortize it across many records.
 */

import { decodeBatch, encodeBatch, FormatError, type BatchRecord } from "./format.js";
import {
  convFlags,
  InvalidParamsError,
  mixFlags,
  type ConvOptions,
  type MixOptions,
} from "./params.js";
import { CliError, runMixCli } from "./runner.js";

export { BATCH_MAGIC, decodeBatch, encodeBatch, sliceRecord, FormatError } from "./format.js";
export type { Batch, BatchRecord } from "./format.js";
export { CONV_STAGES, InvalidParamsError } from "./params.js";
export type { ConvOptions, ConvStage, MixOptions, NeighborMode, SizePolicy } from "./params.js";
export { CliError, pythonInterpreter } from "./runner.js";

export interface MixedCloud {
  mixed: Float32Array;
  label: Float32Array;
  lambda: number;
}

function checkCloud(cloud: Float32Array, name: string): number {
  if (cloud.length === 0 || cloud.length % 3 !== 0) {
    throw new InvalidParamsError(`${name}: coordinate buffer length must be a positive multiple of 3`);
  }
  for (let i = 0; i < cloud.length; i++) {
    if (!Number.isFinite(cloud[i])) {
      throw new InvalidParamsError(`${name}: non-finite coordinate at index ${i}`);
    }
  }
  return cloud.length / 3;
}

function checkLabel(label: Float32Array, classCount: number, name: string): void {
  if (label.length !== classCount) {
    throw new InvalidParamsError(`${name}: expected ${classCount} entries, got ${label.length}`);
  }
  for (let i = 0; i < label.length; i++) {
    if (!Number.isFinite(label[i])) {
      throw new InvalidParamsError(`${name}: non-finite entry at index ${i}`);
    }
  }
}

/**
 * Mix one partner cloud into one base cloud.
 *
 * The result equals record 0 of a native two-record sequential-pairing run
 * with the given seed, byte for byte.
 */
export function mixPairArrays(
  cloudA: Float32Array,
  labelA: Float32Array,
  cloudB: Float32Array,
  labelB: Float32Array,
  params: MixOptions = {},
  seed = 0,
): MixedCloud {
  const nA = checkCloud(cloudA, "cloudA");
  const nB = checkCloud(cloudB, "cloudB");
  if (nA !== nB) {
    throw new InvalidParamsError(`cloud sizes differ: ${nA} vs ${nB} points`);
  }
  checkLabel(labelA, labelA.length, "labelA");
  checkLabel(labelB, labelA.length, "labelB");

  const input = encodeBatch({
    pointsPerCloud: nA,
    classCount: labelA.length,
    records: [
      { coords: cloudA, label: labelA, lambda: 0 },
      { coords: cloudB, label: labelB, lambda: 0 },
    ],
  });
  const output = runMixCli(input, seed, mixFlags(params));
  const record = decodeBatch(output).records[0];
  return { mixed: record.coords, label: record.label, lambda: record.lambda };
}

/**
 * Mix every cloud of a stacked buffer with its successor (wrapping), in one
 * native run: record i pairs cloud i with cloud (i+1) mod count. Amortizes
 * the per-call process cost across the whole batch.
 */
export function mixBatchArrays(
  clouds: Float32Array,
  labels: Float32Array,
  count: number,
  params: MixOptions = {},
  seed = 0,
): MixedCloud[] {
  if (!Number.isInteger(count) || count < 1) {
    throw new InvalidParamsError(`count must be a positive integer, got ${count}`);
  }
  if (clouds.length % count !== 0 || labels.length % count !== 0) {
    throw new InvalidParamsError("stacked buffer lengths must be multiples of count");
  }
  const perCloud = clouds.length / count;
  if (perCloud === 0 || perCloud % 3 !== 0) {
    throw new InvalidParamsError("per-cloud coordinate length must be a positive multiple of 3");
  }
  const classCount = labels.length / count;
  const records: BatchRecord[] = [];
  for (let i = 0; i < count; i++) {
    const coords = clouds.subarray(i * perCloud, (i + 1) * perCloud);
    const label = labels.subarray(i * classCount, (i + 1) * classCount);
    checkCloud(coords, `cloud ${i}`);
    checkLabel(label, classCount, `label ${i}`);
    records.push({ coords, label, lambda: 0 });
  }
  const input = encodeBatch({ pointsPerCloud: perCloud / 3, classCount, records });
  const output = runMixCli(input, seed, mixFlags(params));
  return decodeBatch(output).records.map((r) => ({
    mixed: r.coords,
    label: r.label,
    lambda: r.lambda,
  }));
}

/**
 * Apply the conventional augmentation stages to one cloud; the mixing
 * stage itself is disabled. Deterministic per seed, matching the native
 * pipeline's record 0.
 */
export function convdaArrays(
  cloud: Float32Array,
  config: ConvOptions,
  seed = 0,
): Float32Array {
  const n = checkCloud(cloud, "cloud");
  const input = encodeBatch({
    pointsPerCloud: n,
    classCount: 1,
    records: [{ coords: cloud, label: Float32Array.of(1), lambda: 0 }],
  });
  const output = runMixCli(input, seed, [...convFlags(config), "--no-rsmix"]);
  return decodeBatch(output).records[0].coords;
}
