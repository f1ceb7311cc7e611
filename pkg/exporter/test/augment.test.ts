import { describe, expect, it } from "vitest";

import { DEFAULT_AUGMENT, augment, colorJitter, preprocess, randomResizedCrop } from "../src/augment";
import { RawImage, makeImage } from "../src/image";
import { Rng } from "../src/rng";

function noisy(width: number, height: number, seed: number): RawImage {
  const img = makeImage(width, height);
  const rng = new Rng(seed);
  for (let i = 0; i < img.data.length; i++) img.data[i] = rng.uniform();
  return img;
}

describe("augment", () => {
  const source = noisy(64, 48, 1234);

  it("emits the configured crop size", () => {
    const out = augment(source, new Rng(5));
    expect(out.width).toBe(DEFAULT_AUGMENT.size);
    expect(out.height).toBe(DEFAULT_AUGMENT.size);
  });

  it("is deterministic for a fixed seed", () => {
    const a = augment(source, new Rng(77));
    const b = augment(source, new Rng(77));
    expect(a.data).toEqual(b.data);
  });

  it("varies across seeds", () => {
    const a = augment(source, new Rng(1));
    const b = augment(source, new Rng(2));
    let diff = 0;
    for (let i = 0; i < a.data.length; i++) diff = Math.max(diff, Math.abs(a.data[i] - b.data[i]));
    expect(diff).toBeGreaterThan(0.01);
  });

  it("keeps every sample inside [0, 1]", () => {
    for (let seed = 0; seed < 5; seed++) {
      const out = augment(source, new Rng(seed));
      for (const v of out.data) {
        expect(v).toBeGreaterThanOrEqual(0);
        expect(v).toBeLessThanOrEqual(1);
      }
    }
  });

  it("actually transforms the image", () => {
    const out = augment(source, new Rng(3));
    const plain = preprocess(source, DEFAULT_AUGMENT.size, "direct");
    let diff = 0;
    for (let i = 0; i < out.data.length; i++) {
      diff = Math.max(diff, Math.abs(out.data[i] - plain.data[i]));
    }
    expect(diff).toBeGreaterThan(0.01);
  });
});

describe("randomResizedCrop", () => {
  it("always emits size x size regardless of the sampled crop", () => {
    const source = noisy(40, 40, 9);
    for (let seed = 0; seed < 20; seed++) {
      const out = randomResizedCrop(source, new Rng(seed), DEFAULT_AUGMENT);
      expect(out.width).toBe(DEFAULT_AUGMENT.size);
      expect(out.height).toBe(DEFAULT_AUGMENT.size);
    }
  });

  it("falls back to a center square for extreme configs", () => {
    const source = noisy(10, 50, 2);
    const config = { ...DEFAULT_AUGMENT, cropScale: [0.99, 1.0] as [number, number] };
    // aspect 1:5 can't fit a ~full-area crop with ratio in [3/4, 4/3]
    const out = randomResizedCrop(source, new Rng(0), config);
    expect(out.width).toBe(config.size);
    expect(out.height).toBe(config.size);
  });
});

describe("colorJitter", () => {
  it("keeps values clamped to [0, 1]", () => {
    const img = makeImage(8, 8, 0.95);
    const out = colorJitter(img, new Rng(4), 0.4);
    for (const v of out.data) {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });

  it("is the identity at jitter 0", () => {
    const img = noisy(8, 8, 3);
    const out = colorJitter(img, new Rng(4), 0);
    for (let i = 0; i < img.data.length; i++) {
      expect(out.data[i]).toBeCloseTo(img.data[i], 6);
    }
  });

  it("does not mutate its input", () => {
    const img = noisy(8, 8, 3);
    const before = [...img.data];
    colorJitter(img, new Rng(4), 0.3);
    expect([...img.data]).toEqual(before);
  });
});

describe("preprocess", () => {
  it("matches the resize policies", () => {
    const src = noisy(30, 20, 6);
    expect(preprocess(src, 16, "direct").width).toBe(16);
    expect(preprocess(src, 16, "shorter-side").height).toBe(16);
  });
});
