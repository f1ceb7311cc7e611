/**
 * Export pipeline: dataset -> (preprocess | augment) -> backbone -> .mwie.
 *
 * For every source image we emit 1 + augmentations records. The original
 * always carries the lowest record_id in its group, so downstream grouped
 * splits can recover it deterministically:
 *
 *   group_id  = image index
 *   record_id = image index * (1 + augmentations) + copy index
 *
 * Copy 0 is the unmodified original; copies 1..N are augmented views, each
 * driven by its own stream seeded from (seed, record_id) so the output is a
 * pure function of the inputs. With --trivial the views are pixel-identical
 * copies of the original, which keeps ids/groups realistic while making the
 * embedding payload exactly redundant.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { AugmentConfig, DEFAULT_AUGMENT, augment, preprocess } from "./augment";
import { Backbone } from "./backbone";
import { ImageDataset } from "./dataset";
import { RawImage, ResizePolicy, cloneImage } from "./image";
import { MwieFile, MwieRecord, encodeMwie } from "./mwie";
import { Rng, mixSeed } from "./rng";

export interface ExportOptions {
  augmentations: number;
  trivial: boolean;
  seed: bigint;
  resizePolicy: ResizePolicy;
  /** images per inference call; bounds peak memory (default 64) */
  batchSize?: number;
  augmentConfig?: AugmentConfig;
}

export const DEFAULT_EXPORT: ExportOptions = {
  augmentations: 0,
  trivial: false,
  seed: 0n,
  resizePolicy: "direct",
};

const DEFAULT_BATCH_SIZE = 64;

function unitVector(embedding: Float64Array): Float32Array {
  let sumSq = 0;
  for (let i = 0; i < embedding.length; i++) sumSq += embedding[i] * embedding[i];
  const norm = Math.sqrt(sumSq);
  if (!(norm > 0)) {
    throw new Error("backbone produced a zero embedding; cannot L2-normalize");
  }
  const out = new Float32Array(embedding.length);
  for (let i = 0; i < embedding.length; i++) out[i] = embedding[i] / norm;
  return out;
}

interface PendingView {
  recordId: bigint;
  groupId: bigint;
  labels: number[];
  view: RawImage;
}

/** Build the in-memory .mwie content for a dataset. */
export function exportDataset(
  dataset: ImageDataset,
  backbone: Backbone,
  options: ExportOptions,
): MwieFile {
  if (!Number.isInteger(options.augmentations) || options.augmentations < 0) {
    throw new Error(`augmentations must be a non-negative integer, not ${options.augmentations}`);
  }
  const batchSize = options.batchSize ?? DEFAULT_BATCH_SIZE;
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    throw new Error(`batchSize must be a positive integer, not ${batchSize}`);
  }
  const config = options.augmentConfig ?? { ...DEFAULT_AUGMENT, size: backbone.inputSize };
  const copies = 1 + options.augmentations;
  const records: MwieRecord[] = [];

  // inference runs in batches so only batchSize decoded views are held at once
  const pending: PendingView[] = [];
  const flush = () => {
    if (pending.length === 0) return;
    const views = pending.map((p) => p.view);
    const embeddings = backbone.embedBatch
      ? backbone.embedBatch(views)
      : views.map((v) => backbone.embed(v));
    if (embeddings.length !== pending.length) {
      throw new Error(
        `backbone returned ${embeddings.length} embeddings for a batch of ${pending.length}`,
      );
    }
    for (let i = 0; i < pending.length; i++) {
      records.push({
        recordId: pending[i].recordId,
        groupId: pending[i].groupId,
        labels: pending[i].labels,
        vector: unitVector(embeddings[i]),
      });
    }
    pending.length = 0;
  };

  for (let i = 0; i < dataset.images.length; i++) {
    const source = dataset.images[i];
    const original = preprocess(source.image, backbone.inputSize, options.resizePolicy);
    for (let copy = 0; copy < copies; copy++) {
      const recordId = BigInt(i) * BigInt(copies) + BigInt(copy);
      let view: RawImage;
      if (copy === 0) {
        view = original;
      } else if (options.trivial) {
        view = cloneImage(original);
      } else {
        const rng = new Rng(mixSeed(options.seed, recordId));
        view = augment(source.image, rng, config);
      }
      pending.push({ recordId, groupId: BigInt(i), labels: source.labels, view });
      if (pending.length === batchSize) flush();
    }
  }
  flush();

  return { dim: backbone.dim, labelNames: dataset.labelNames, records };
}

/** Export and write to disk; returns the byte count written. */
export function exportToFile(
  dataset: ImageDataset,
  backbone: Backbone,
  options: ExportOptions,
  outPath: string,
): number {
  const bytes = encodeMwie(exportDataset(dataset, backbone, options));
  fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
  fs.writeFileSync(outPath, bytes);
  return bytes.length;
}
