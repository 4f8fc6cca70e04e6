/** Mixing and augmentation options, mirrored onto CLI flags. */

export class InvalidParamsError extends Error {}

export type NeighborMode = "ball" | "knn";
export type SizePolicy = "paper" | "fixed-n";

export interface MixOptions {
  neighborMode?: NeighborMode;
  theta?: number;
  nmaxFraction?: number;
  applyProb?: number;
  sizePolicy?: SizePolicy;
}

export const CONV_STAGES = ["jitter", "scale", "rotate-y", "shift", "drop"] as const;
export type ConvStage = (typeof CONV_STAGES)[number];

export interface ConvOptions {
  stages: ConvStage[];
  jitterSigma?: number;
  jitterClip?: number;
  scaleLo?: number;
  scaleHi?: number;
  shiftRange?: number;
  dropMaxRatio?: number;
}

export function mixFlags(options: MixOptions): string[] {
  const neighborMode = options.neighborMode ?? "ball";
  const theta = options.theta ?? 1.0;
  const nmaxFraction = options.nmaxFraction ?? 0.5;
  const applyProb = options.applyProb ?? 0.5;
  const sizePolicy = options.sizePolicy ?? "fixed-n";
  if (neighborMode !== "ball" && neighborMode !== "knn") {
    throw new InvalidParamsError(`neighborMode must be 'ball' or 'knn', got ${neighborMode}`);
  }
  if (!(theta > 0) || !Number.isFinite(theta)) {
    throw new InvalidParamsError(`theta must be a positive real, got ${theta}`);
  }
  if (!(nmaxFraction > 0 && nmaxFraction <= 1)) {
    throw new InvalidParamsError(`nmaxFraction must be in (0, 1], got ${nmaxFraction}`);
  }
  if (!(applyProb >= 0 && applyProb <= 1)) {
    throw new InvalidParamsError(`applyProb must be in [0, 1], got ${applyProb}`);
  }
  if (sizePolicy !== "paper" && sizePolicy !== "fixed-n") {
    throw new InvalidParamsError(`sizePolicy must be 'paper' or 'fixed-n', got ${sizePolicy}`);
  }
  return [
    "--neighbor", neighborMode,
    "--theta", String(theta),
    "--nmax-frac", String(nmaxFraction),
    "--apply-prob", String(applyProb),
    "--size-policy", sizePolicy,
  ];
}

export function convFlags(options: ConvOptions): string[] {
  for (const stage of options.stages) {
    if (!CONV_STAGES.includes(stage)) {
      throw new InvalidParamsError(`unknown augmentation stage ${stage}`);
    }
  }
  const flags = ["--convda", options.stages.join(",")];
  const numeric: Array<[string, number | undefined]> = [
    ["--jitter-sigma", options.jitterSigma],
    ["--jitter-clip", options.jitterClip],
    ["--scale-lo", options.scaleLo],
    ["--scale-hi", options.scaleHi],
    ["--shift-range", options.shiftRange],
    ["--drop-max-ratio", options.dropMaxRatio],
  ];
  for (const [flag, value] of numeric) {
    if (value !== undefined) {
      if (!Number.isFinite(value)) {
        throw new InvalidParamsError(`${flag} must be finite, got ${value}`);
      }
      flags.push(flag, String(value));
    }
  }
  return flags;
}
