/**
 * Frozen vision backbones. A backbone maps a preprocessed image to a raw
 * embedding; the exporter L2-normalizes afterwards, so backbones need not
 * emit unit vectors.
 *
 * Resolvable today:
 *
 * - "stub" / "stub-<dim>": a deterministic random-projection encoder for
 *   tests and format work. It pools the image onto a coarse grid and
 *   projects through a fixed seeded matrix, so identical pixels give
 *   identical embeddings and color/layout structure stays linearly
 *   separable.
 *
 * - "clip" / "clip-vit-b32" (512-dim) is the intended production encoder,
 *   but this build bundles neither its weights nor an inference runtime
 *   and never downloads; resolving it reports exactly that. Any encoder
 *   implementing the Backbone interface can be passed to exportDataset
 *   directly.
 */

import { RawImage, resize } from "./image";
import { Rng } from "./rng";

export interface Backbone {
  id: string;
  dim: number;
  /** expected input side length */
  inputSize: number;
  embed(image: RawImage): Float64Array;
  /** optional batched inference; must preserve order */
  embedBatch?(images: RawImage[]): Float64Array[];
}

export class BackboneError extends Error {}

const STUB_GRID = 8;
const STUB_SEED = 0x5707b;

/** Pool to an 8x8 RGB grid, then apply a fixed seeded linear projection. */
export class StubBackbone implements Backbone {
  readonly id: string;
  readonly dim: number;
  readonly inputSize = 224;
  private readonly projection: Float64Array;
  private readonly features = STUB_GRID * STUB_GRID * 3;

  constructor(dim = 512) {
    if (!Number.isInteger(dim) || dim < 2) {
      throw new BackboneError(`stub dim must be an integer >= 2, not ${dim}`);
    }
    this.id = `stub-${dim}`;
    this.dim = dim;
    const rng = new Rng(STUB_SEED + dim);
    this.projection = new Float64Array(this.features * dim);
    for (let i = 0; i < this.projection.length; i++) {
      this.projection[i] = rng.uniform() * 2 - 1;
    }
  }

  embed(image: RawImage): Float64Array {
    const pooled = resize(image, STUB_GRID, STUB_GRID);
    const out = new Float64Array(this.dim);
    for (let f = 0; f < this.features; f++) {
      const v = pooled.data[f];
      if (v === 0) continue;
      const row = f * this.dim;
      for (let d = 0; d < this.dim; d++) {
        out[d] += v * this.projection[row + d];
      }
    }
    return out;
  }

  embedBatch(images: RawImage[]): Float64Array[] {
    return images.map((image) => this.embed(image));
  }
}

/**
 * Resolve a backbone identifier. Unknown ids and unavailable encoders
 * raise BackboneError with an actionable message.
 */
export function resolveBackbone(id: string): Backbone {
  if (id === "stub") return new StubBackbone();
  const stubMatch = /^stub-(\d+)$/.exec(id);
  if (stubMatch) return new StubBackbone(Number(stubMatch[1]));
  if (id === "clip" || id === "clip-vit-b32") {
    throw new BackboneError(
      "clip-vit-b32 needs CLIP weights and an inference runtime, neither of " +
        "which is bundled, and this tool never downloads; embed through the " +
        "Backbone interface in code, or use stub-<dim> for format work",
    );
  }
  throw new BackboneError(
    `unknown backbone ${JSON.stringify(id)}; available: stub, stub-<dim>, clip-vit-b32`,
  );
}
