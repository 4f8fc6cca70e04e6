/**
 * Codec for the RSMX1 batch container (the native pipeline's output/input
 * format). Little-endian: 5-byte magic, three u32 header fields (cloud
 * count, points per cloud, class count), then per record n*3 f32
 * coordinates, C f32 label entries, and one f32 mix ratio.
 */

export const BATCH_MAGIC = "RSMX1";
export const HEADER_BYTES = BATCH_MAGIC.length + 12;

export class FormatError extends Error {}

export interface BatchRecord {
  coords: Float32Array; // length n*3, row-major xyz
  label: Float32Array; // length C
  lambda: number;
}

export interface Batch {
  pointsPerCloud: number;
  classCount: number;
  records: BatchRecord[];
}

export function recordBytes(pointsPerCloud: number, classCount: number): number {
  return (pointsPerCloud * 3 + classCount + 1) * 4;
}

function checkFinite(values: Float32Array, what: string): void {
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new FormatError(`${what}: non-finite value at index ${i}`);
    }
  }
}

export function encodeRecord(record: BatchRecord): Uint8Array {
  const out = new Uint8Array(recordBytes(record.coords.length / 3, record.label.length));
  const view = new DataView(out.buffer);
  let offset = 0;
  for (let i = 0; i < record.coords.length; i++, offset += 4) {
    view.setFloat32(offset, record.coords[i], true);
  }
  for (let i = 0; i < record.label.length; i++, offset += 4) {
    view.setFloat32(offset, record.label[i], true);
  }
  view.setFloat32(offset, record.lambda, true);
  return out;
}

export function encodeBatch(batch: Batch): Uint8Array {
  const { pointsPerCloud, classCount, records } = batch;
  if (records.length === 0) {
    throw new FormatError("empty input: a batch needs at least one record");
  }
  for (const [i, rec] of records.entries()) {
    if (rec.coords.length !== pointsPerCloud * 3) {
      throw new FormatError(
        `record ${i}: expected ${pointsPerCloud * 3} coordinates, got ${rec.coords.length}`,
      );
    }
    if (rec.label.length !== classCount) {
      throw new FormatError(
        `record ${i}: expected ${classCount} label entries, got ${rec.label.length}`,
      );
    }
    if (!(rec.lambda >= 0 && rec.lambda <= 1)) {
      throw new FormatError(`record ${i}: mix ratio ${rec.lambda} out of [0, 1]`);
    }
    checkFinite(rec.coords, `record ${i} coords`);
    checkFinite(rec.label, `record ${i} label`);
  }

  const out = new Uint8Array(HEADER_BYTES + records.length * recordBytes(pointsPerCloud, classCount));
  const view = new DataView(out.buffer);
  for (let i = 0; i < BATCH_MAGIC.length; i++) {
    out[i] = BATCH_MAGIC.charCodeAt(i);
  }
  view.setUint32(5, records.length, true);
  view.setUint32(9, pointsPerCloud, true);
  view.setUint32(13, classCount, true);
  let offset = HEADER_BYTES;
  for (const rec of records) {
    out.set(encodeRecord(rec), offset);
    offset += recordBytes(pointsPerCloud, classCount);
  }
  return out;
}

export function decodeBatch(data: Uint8Array): Batch {
  if (data.length < HEADER_BYTES) {
    throw new FormatError("truncated file: shorter than the header");
  }
  for (let i = 0; i < BATCH_MAGIC.length; i++) {
    if (data[i] !== BATCH_MAGIC.charCodeAt(i)) {
      throw new FormatError("bad magic, not a batch file");
    }
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const count = view.getUint32(5, true);
  const pointsPerCloud = view.getUint32(9, true);
  const classCount = view.getUint32(13, true);
  if (count === 0 || pointsPerCloud === 0) {
    throw new FormatError("empty input: zero clouds or points");
  }
  const stride = recordBytes(pointsPerCloud, classCount);
  if (data.length !== HEADER_BYTES + count * stride) {
    throw new FormatError(
      `inconsistent counts: expected ${HEADER_BYTES + count * stride} bytes, found ${data.length}`,
    );
  }

  const records: BatchRecord[] = [];
  for (let i = 0; i < count; i++) {
    const base = HEADER_BYTES + i * stride;
    const coords = new Float32Array(pointsPerCloud * 3);
    for (let j = 0; j < coords.length; j++) {
      coords[j] = view.getFloat32(base + j * 4, true);
    }
    const label = new Float32Array(classCount);
    for (let j = 0; j < classCount; j++) {
      label[j] = view.getFloat32(base + (pointsPerCloud * 3 + j) * 4, true);
    }
    const lambda = view.getFloat32(base + stride - 4, true);
    checkFinite(coords, `record ${i} coords`);
    checkFinite(label, `record ${i} label`);
    if (!(lambda >= 0 && lambda <= 1)) {
      throw new FormatError(`record ${i}: mix ratio ${lambda} out of [0, 1]`);
    }
    records.push({ coords, label, lambda });
  }
  return { pointsPerCloud, classCount, records };
}

/** Raw on-disk bytes of record `i`, for byte-level comparisons. */
export function sliceRecord(data: Uint8Array, i: number): Uint8Array {
  const batch = decodeBatch(data); // validates layout
  const stride = recordBytes(batch.pointsPerCloud, batch.classCount);
  if (i < 0 || i >= batch.records.length) {
    throw new FormatError(`record index ${i} out of range`);
  }
  return data.slice(HEADER_BYTES + i * stride, HEADER_BYTES + (i + 1) * stride);
}
