/**
 * Dataset adapters. Every adapter yields the same shape: a label
 * vocabulary plus images carrying zero or more label indices, which is all
 * the exporter needs. Two sources are supported:
 *
 * - the CIFAR-10 binary format (a directory of *.bin batches or a single
 *   .bin file): 3073-byte records, 1 label byte then 3072 bytes of planar
 *   RGB for a 32x32 image;
 * - a generic image folder: P6 PPM files plus a manifest.json mapping each
 *   file to one or more label names (multilabel preserved).
 */

import * as fs from "fs";
import * as path from "path";

import { RawImage, makeImage } from "./image";

export interface LabeledImage {
  /** stable id within the dataset; record ids are derived from it */
  id: number;
  image: RawImage;
  /** sorted, de-duplicated label indices into labelNames */
  labels: number[];
}

export interface ImageDataset {
  labelNames: string[];
  images: LabeledImage[];
}

export class DatasetError extends Error {}

export const CIFAR10_LABELS = [
  "airplane",
  "automobile",
  "bird",
  "cat",
  "deer",
  "dog",
  "frog",
  "horse",
  "ship",
  "truck",
];

const CIFAR_RECORD = 3073;
const CIFAR_SIDE = 32;
const CIFAR_PLANE = CIFAR_SIDE * CIFAR_SIDE;

function cifarRecordToImage(buffer: Buffer, offset: number): RawImage {
  const image = makeImage(CIFAR_SIDE, CIFAR_SIDE);
  for (let p = 0; p < CIFAR_PLANE; p++) {
    image.data[p * 3] = buffer[offset + 1 + p] / 255;
    image.data[p * 3 + 1] = buffer[offset + 1 + CIFAR_PLANE + p] / 255;
    image.data[p * 3 + 2] = buffer[offset + 1 + 2 * CIFAR_PLANE + p] / 255;
  }
  return image;
}

function readCifarFile(file: string, images: LabeledImage[]): void {
  const buffer = fs.readFileSync(file);
  if (buffer.length === 0 || buffer.length % CIFAR_RECORD !== 0) {
    throw new DatasetError(
      `${file}: size ${buffer.length} is not a multiple of the ${CIFAR_RECORD}-byte record`,
    );
  }
  const count = buffer.length / CIFAR_RECORD;
  for (let i = 0; i < count; i++) {
    const offset = i * CIFAR_RECORD;
    const label = buffer[offset];
    if (label >= CIFAR10_LABELS.length) {
      throw new DatasetError(`${file}: record ${i} has label byte ${label}, expected 0..9`);
    }
    // ids are assigned once all batches are concatenated
    images.push({ id: 0, image: cifarRecordToImage(buffer, offset), labels: [label] });
  }
}

/** Load CIFAR-10 from a .bin file or a directory of *.bin batch files. */
export function loadCifar10(source: string, limit?: number): ImageDataset {
  const stat = fs.statSync(source, { throwIfNoEntry: false });
  if (!stat) {
    throw new DatasetError(`dataset path not found: ${source}`);
  }
  const files: string[] = [];
  if (stat.isDirectory()) {
    for (const name of fs.readdirSync(source).sort()) {
      if (name.endsWith(".bin")) files.push(path.join(source, name));
    }
    if (files.length === 0) {
      throw new DatasetError(`${source}: no .bin batch files found`);
    }
  } else {
    files.push(source);
  }
  const images: LabeledImage[] = [];
  for (const file of files) {
    readCifarFile(file, images);
    if (limit !== undefined && images.length >= limit) break;
  }
  const kept = limit !== undefined ? images.slice(0, limit) : images;
  kept.forEach((img, i) => {
    img.id = i;
  });
  return { labelNames: [...CIFAR10_LABELS], images: kept };
}

/** Decode a binary P6 PPM with 8-bit samples. */
export function decodePpm(buffer: Buffer, name: string): RawImage {
  // header: "P6" <width> <height> <maxval>, whitespace/comment separated
  let pos = 0;
  const token = (): string => {
    while (pos < buffer.length) {
      const ch = buffer[pos];
      if (ch === 0x23) {
        while (pos < buffer.length && buffer[pos] !== 0x0a) pos++;
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < buffer.length && !/\s/.test(String.fromCharCode(buffer[pos]))) pos++;
    return buffer.toString("ascii", start, pos);
  };
  if (token() !== "P6") {
    throw new DatasetError(`${name}: not a binary P6 PPM`);
  }
  const width = Number(token());
  const height = Number(token());
  const maxval = Number(token());
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new DatasetError(`${name}: bad PPM dimensions`);
  }
  if (maxval !== 255) {
    throw new DatasetError(`${name}: only maxval 255 is supported, got ${maxval}`);
  }
  pos++; // single whitespace after maxval
  const need = width * height * 3;
  if (buffer.length - pos < need) {
    throw new DatasetError(`${name}: pixel data truncated`);
  }
  const image = makeImage(width, height);
  for (let i = 0; i < need; i++) {
    image.data[i] = buffer[pos + i] / 255;
  }
  return image;
}

interface Manifest {
  labels: string[];
  images: Record<string, string[]>;
}

function parseManifest(file: string): Manifest {
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(file, "utf8"));
  } catch (err) {
    throw new DatasetError(`${file}: unreadable manifest (${(err as Error).message})`);
  }
  const m = raw as Partial<Manifest>;
  if (!Array.isArray(m.labels) || m.labels.some((l) => typeof l !== "string")) {
    throw new DatasetError(`${file}: "labels" must be an array of strings`);
  }
  if (typeof m.images !== "object" || m.images === null) {
    throw new DatasetError(`${file}: "images" must map file names to label-name arrays`);
  }
  return m as Manifest;
}

/**
 * Load a folder of PPM images described by manifest.json. Undecodable
 * images are skipped with a warning on stderr, matching the exporter's
 * keep-going contract; unknown label names are hard errors because they
 * indicate a wrong manifest rather than one bad file.
 */
export function loadImageFolder(dir: string, limit?: number): ImageDataset {
  const manifestPath = path.join(dir, "manifest.json");
  if (!fs.existsSync(manifestPath)) {
    throw new DatasetError(`${dir}: manifest.json not found`);
  }
  const manifest = parseManifest(manifestPath);
  const labelIndex = new Map(manifest.labels.map((name, i) => [name, i]));
  const images: LabeledImage[] = [];
  const names = Object.keys(manifest.images).sort();
  for (const name of names) {
    if (limit !== undefined && images.length >= limit) break;
    const labelNames = manifest.images[name];
    const labels = [
      ...new Set(
        labelNames.map((l) => {
          const idx = labelIndex.get(l);
          if (idx === undefined) {
            throw new DatasetError(`${name}: label ${JSON.stringify(l)} not in manifest vocabulary`);
          }
          return idx;
        }),
      ),
    ].sort((a, b) => a - b);
    let image: RawImage;
    try {
      image = decodePpm(fs.readFileSync(path.join(dir, name)), name);
    } catch (err) {
      console.error(`warning: skipping ${name}: ${(err as Error).message}`);
      continue;
    }
    images.push({ id: images.length, image, labels });
  }
  return { labelNames: [...manifest.labels], images };
}

/**
 * Route a dataset identifier: "cifar10" looks in ./data/cifar-10-batches-bin,
 * an existing path is probed for CIFAR batches vs a manifest folder.
 */
export function loadDataset(idOrPath: string, limit?: number): ImageDataset {
  let target = idOrPath;
  if (idOrPath === "cifar10") {
    target = path.join("data", "cifar-10-batches-bin");
    if (!fs.existsSync(target)) {
      throw new DatasetError(
        `dataset "cifar10" expects the binary batches under ${target} ` +
          "(this tool never downloads; fetch cifar-10-binary.tar.gz and unpack it there)",
      );
    }
  }
  const stat = fs.statSync(target, { throwIfNoEntry: false });
  if (!stat) {
    throw new DatasetError(`dataset path not found: ${target}`);
  }
  if (stat.isFile()) {
    if (target.endsWith(".bin")) return loadCifar10(target, limit);
    throw new DatasetError(`${target}: expected a .bin CIFAR batch or a dataset directory`);
  }
  if (fs.existsSync(path.join(target, "manifest.json"))) {
    return loadImageFolder(target, limit);
  }
  return loadCifar10(target, limit);
}
