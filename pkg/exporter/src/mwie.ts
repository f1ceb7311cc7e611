/**
 * Writer (and verifying reader) for the .mwie embedding container, byte
 * for byte the format the mwi toolkit ingests:
 *
 *   magic        4 bytes  "MWIE"
 *   version      u16      1
 *   dim          u32
 *   label_count  u32
 *   record_count u64
 *   labels       per label: u16 byte length + UTF-8 name
 *   records      per record: record_id u64, group_id u64, n_labels u16,
 *                n_labels strictly increasing u32 indices, dim * f32
 *
 * Everything is little-endian. No timestamp or other ambient state is
 * embedded, so identical inputs serialize to identical bytes.
 */

export const MWIE_MAGIC = "MWIE";
export const MWIE_VERSION = 1;

export interface MwieRecord {
  recordId: bigint;
  groupId: bigint;
  /** strictly increasing indices into labelNames */
  labels: number[];
  /** length = dim; values are written as f32 */
  vector: Float32Array;
}

export interface MwieFile {
  dim: number;
  labelNames: string[];
  records: MwieRecord[];
}

export class MwieFormatError extends Error {}

function validate(file: MwieFile): void {
  if (!Number.isInteger(file.dim) || file.dim < 1) {
    throw new MwieFormatError(`dim must be a positive integer, not ${file.dim}`);
  }
  file.records.forEach((record, i) => {
    if (record.vector.length !== file.dim) {
      throw new MwieFormatError(
        `record ${i}: vector length ${record.vector.length} != dim ${file.dim}`,
      );
    }
    for (let j = 0; j < record.labels.length; j++) {
      const label = record.labels[j];
      if (!Number.isInteger(label) || label < 0 || label >= file.labelNames.length) {
        throw new MwieFormatError(`record ${i}: label index ${label} outside vocabulary`);
      }
      if (j > 0 && record.labels[j - 1] >= label) {
        throw new MwieFormatError(`record ${i}: label indices must be strictly increasing`);
      }
    }
  });
}

/** Serialize to the exact on-disk byte layout. */
export function encodeMwie(file: MwieFile): Buffer {
  validate(file);
  const labelBytes = file.labelNames.map((name) => Buffer.from(name, "utf8"));
  let size = 4 + 2 + 4 + 4 + 8;
  for (const b of labelBytes) size += 2 + b.length;
  for (const r of file.records) size += 8 + 8 + 2 + 4 * r.labels.length + 4 * file.dim;

  const out = Buffer.allocUnsafe(size);
  let pos = 0;
  pos += out.write(MWIE_MAGIC, pos, "ascii");
  pos = out.writeUInt16LE(MWIE_VERSION, pos);
  pos = out.writeUInt32LE(file.dim, pos);
  pos = out.writeUInt32LE(file.labelNames.length, pos);
  pos = out.writeBigUInt64LE(BigInt(file.records.length), pos);
  for (const b of labelBytes) {
    pos = out.writeUInt16LE(b.length, pos);
    pos += b.copy(out, pos);
  }
  for (const record of file.records) {
    pos = out.writeBigUInt64LE(record.recordId, pos);
    pos = out.writeBigUInt64LE(record.groupId, pos);
    pos = out.writeUInt16LE(record.labels.length, pos);
    for (const label of record.labels) {
      pos = out.writeUInt32LE(label, pos);
    }
    for (let i = 0; i < file.dim; i++) {
      pos = out.writeFloatLE(record.vector[i], pos);
    }
  }
  if (pos !== size) {
    throw new MwieFormatError(`internal: wrote ${pos} bytes, allocated ${size}`);
  }
  return out;
}

/** Parse a .mwie buffer back; used by round-trip tests. */
export function decodeMwie(buffer: Buffer): MwieFile {
  let pos = 0;
  const need = (n: number, what: string) => {
    if (pos + n > buffer.length) {
      throw new MwieFormatError(`truncated while reading ${what}`);
    }
  };
  need(4, "magic");
  const magic = buffer.toString("ascii", 0, 4);
  pos = 4;
  if (magic !== MWIE_MAGIC) {
    throw new MwieFormatError(`bad magic ${JSON.stringify(magic)}`);
  }
  need(2 + 4 + 4 + 8, "header");
  const version = buffer.readUInt16LE(pos);
  pos += 2;
  if (version !== MWIE_VERSION) {
    throw new MwieFormatError(`unsupported version ${version}`);
  }
  const dim = buffer.readUInt32LE(pos);
  pos += 4;
  const labelCount = buffer.readUInt32LE(pos);
  pos += 4;
  const recordCount = buffer.readBigUInt64LE(pos);
  pos += 8;

  const labelNames: string[] = [];
  for (let i = 0; i < labelCount; i++) {
    need(2, `label ${i} length`);
    const len = buffer.readUInt16LE(pos);
    pos += 2;
    need(len, `label ${i} name`);
    labelNames.push(buffer.toString("utf8", pos, pos + len));
    pos += len;
  }

  const records: MwieRecord[] = [];
  for (let i = 0n; i < recordCount; i++) {
    need(8 + 8 + 2, `record ${i} head`);
    const recordId = buffer.readBigUInt64LE(pos);
    pos += 8;
    const groupId = buffer.readBigUInt64LE(pos);
    pos += 8;
    const nLabels = buffer.readUInt16LE(pos);
    pos += 2;
    need(4 * nLabels, `record ${i} labels`);
    const labels: number[] = [];
    for (let j = 0; j < nLabels; j++) {
      labels.push(buffer.readUInt32LE(pos));
      pos += 4;
    }
    need(4 * dim, `record ${i} vector`);
    const vector = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      vector[j] = buffer.readFloatLE(pos);
      pos += 4;
    }
    records.push({ recordId, groupId, labels, vector });
  }
  if (pos !== buffer.length) {
    throw new MwieFormatError(`${buffer.length - pos} trailing bytes after last record`);
  }
  const file = { dim, labelNames, records };
  validate(file);
  return file;
}
