/**
 * Seeded augmentation pipeline. One call applies, in a fixed order:
 *
 *   1. random crop and resize to the target size,
 *   2. random horizontal flip,
 *   3. random color jitter (brightness, contrast, saturation),
 *   4. random Gaussian blur.
 *
 * The trivial variant bypasses all four and returns a pixel-identical copy,
 * so downstream embeddings of trivial copies equal the original's exactly.
 */

import { RawImage, ResizePolicy, cloneImage, flipHorizontal, gaussianBlur, resampleRect, resizeTo } from "./image";
import { Rng } from "./rng";

export interface AugmentConfig {
  /** output side length */
  size: number;
  /** area fraction range for the random crop */
  cropScale: [number, number];
  /** aspect ratio range for the random crop */
  cropRatio: [number, number];
  flipProbability: number;
  /** multiplier half-range: factors drawn from [1-j, 1+j] */
  colorJitter: number;
  blurSigma: [number, number];
}

export const DEFAULT_AUGMENT: AugmentConfig = {
  size: 224,
  cropScale: [0.5, 1.0],
  cropRatio: [3 / 4, 4 / 3],
  flipProbability: 0.5,
  colorJitter: 0.2,
  blurSigma: [0.1, 2.0],
};

function clamp01(v: number): number {
  return v < 0 ? 0 : v > 1 ? 1 : v;
}

/** Random area-and-ratio crop resampled straight to size x size. */
export function randomResizedCrop(image: RawImage, rng: Rng, config: AugmentConfig): RawImage {
  const area = image.width * image.height;
  for (let attempt = 0; attempt < 10; attempt++) {
    const targetArea = area * rng.range(config.cropScale[0], config.cropScale[1]);
    // sample log-uniform so the ratio distribution is symmetric around 1
    const logLo = Math.log(config.cropRatio[0]);
    const logHi = Math.log(config.cropRatio[1]);
    const ratio = Math.exp(rng.range(logLo, logHi));
    const w = Math.round(Math.sqrt(targetArea * ratio));
    const h = Math.round(Math.sqrt(targetArea / ratio));
    if (w < 1 || h < 1 || w > image.width || h > image.height) continue;
    const x = rng.below(image.width - w + 1);
    const y = rng.below(image.height - h + 1);
    return resampleRect(image, { x, y, width: w, height: h }, config.size, config.size);
  }
  // fallback: center square of the shorter side
  const side = Math.min(image.width, image.height);
  const x = Math.floor((image.width - side) / 2);
  const y = Math.floor((image.height - side) / 2);
  return resampleRect(image, { x, y, width: side, height: side }, config.size, config.size);
}

export function colorJitter(image: RawImage, rng: Rng, jitter: number): RawImage {
  const brightness = rng.range(1 - jitter, 1 + jitter);
  const contrast = rng.range(1 - jitter, 1 + jitter);
  const saturation = rng.range(1 - jitter, 1 + jitter);

  const out = cloneImage(image);
  const d = out.data;

  let mean = 0;
  for (let i = 0; i < d.length; i += 3) {
    // ITU-R 601 luma, the conventional grayscale weighting
    mean += 0.299 * d[i] + 0.587 * d[i + 1] + 0.114 * d[i + 2];
  }
  mean /= d.length / 3;

  for (let i = 0; i < d.length; i += 3) {
    let r = d[i] * brightness;
    let g = d[i + 1] * brightness;
    let b = d[i + 2] * brightness;
    r = mean + (r - mean) * contrast;
    g = mean + (g - mean) * contrast;
    b = mean + (b - mean) * contrast;
    const gray = 0.299 * r + 0.587 * g + 0.114 * b;
    d[i] = clamp01(gray + (r - gray) * saturation);
    d[i + 1] = clamp01(gray + (g - gray) * saturation);
    d[i + 2] = clamp01(gray + (b - gray) * saturation);
  }
  return out;
}

/**
 * One augmented copy of an image. Drawing order is fixed, so a given
 * (rng state, image) pair always yields the same pixels.
 */
export function augment(image: RawImage, rng: Rng, config: AugmentConfig = DEFAULT_AUGMENT): RawImage {
  let out = randomResizedCrop(image, rng, config);
  if (rng.chance(config.flipProbability)) {
    out = flipHorizontal(out);
  }
  out = colorJitter(out, rng, config.colorJitter);
  out = gaussianBlur(out, rng.range(config.blurSigma[0], config.blurSigma[1]));
  return out;
}

/**
 * The record an exporter feeds the backbone for one image: the preprocessed
 * original under the resize policy, or an augmented copy.
 */
export function preprocess(
  image: RawImage,
  size: number,
  policy: ResizePolicy,
): RawImage {
  return resizeTo(image, size, policy);
}
