/**
 * Minimal in-memory image model: planar-free RGB float32 in [0, 1],
 * row-major, interleaved (r, g, b per pixel). All geometry operations are
 * pure and allocate fresh images.
 */

export interface RawImage {
  width: number;
  height: number;
  /** length = width * height * 3, values in [0, 1] */
  data: Float32Array;
}

export function makeImage(width: number, height: number, fill = 0): RawImage {
  const data = new Float32Array(width * height * 3);
  if (fill !== 0) data.fill(fill);
  return { width, height, data };
}

export function cloneImage(image: RawImage): RawImage {
  return { width: image.width, height: image.height, data: image.data.slice() };
}

function clampIndex(v: number, max: number): number {
  return v < 0 ? 0 : v > max ? max : v;
}

/**
 * Bilinear resampling of an arbitrary source rectangle onto a target size.
 * The rectangle may be fractional; samples outside the image clamp to the
 * edge. Used for plain resizes (rectangle = whole image) and for
 * crop-and-resize in one pass, which avoids a lossy intermediate crop.
 */
export function resampleRect(
  src: RawImage,
  rect: { x: number; y: number; width: number; height: number },
  outWidth: number,
  outHeight: number,
): RawImage {
  const out = makeImage(outWidth, outHeight);
  const sx = rect.width / outWidth;
  const sy = rect.height / outHeight;
  const maxX = src.width - 1;
  const maxY = src.height - 1;
  for (let oy = 0; oy < outHeight; oy++) {
    // sample at pixel centers so the mapping is symmetric
    const fy = rect.y + (oy + 0.5) * sy - 0.5;
    const y0 = clampIndex(Math.floor(fy), maxY);
    const y1 = clampIndex(y0 + 1, maxY);
    const wy = clampIndex(fy - y0, 1);
    for (let ox = 0; ox < outWidth; ox++) {
      const fx = rect.x + (ox + 0.5) * sx - 0.5;
      const x0 = clampIndex(Math.floor(fx), maxX);
      const x1 = clampIndex(x0 + 1, maxX);
      const wx = clampIndex(fx - x0, 1);
      const o = (oy * outWidth + ox) * 3;
      for (let c = 0; c < 3; c++) {
        const p00 = src.data[(y0 * src.width + x0) * 3 + c];
        const p01 = src.data[(y0 * src.width + x1) * 3 + c];
        const p10 = src.data[(y1 * src.width + x0) * 3 + c];
        const p11 = src.data[(y1 * src.width + x1) * 3 + c];
        const top = p00 + (p01 - p00) * wx;
        const bottom = p10 + (p11 - p10) * wx;
        out.data[o + c] = top + (bottom - top) * wy;
      }
    }
  }
  return out;
}

export function resize(src: RawImage, width: number, height: number): RawImage {
  return resampleRect(src, { x: 0, y: 0, width: src.width, height: src.height }, width, height);
}

export function centerCrop(src: RawImage, size: number): RawImage {
  const x = Math.floor((src.width - size) / 2);
  const y = Math.floor((src.height - size) / 2);
  const out = makeImage(size, size);
  for (let oy = 0; oy < size; oy++) {
    const srcRow = ((y + oy) * src.width + x) * 3;
    out.data.set(src.data.subarray(srcRow, srcRow + size * 3), oy * size * 3);
  }
  return out;
}

export type ResizePolicy = "direct" | "shorter-side";

/**
 * Bring an image to size x size under one of two policies: "direct"
 * stretches to the target, "shorter-side" scales the smaller dimension to
 * the target and center-crops the other.
 */
export function resizeTo(src: RawImage, size: number, policy: ResizePolicy): RawImage {
  if (policy === "direct") {
    if (src.width === size && src.height === size) return cloneImage(src);
    return resize(src, size, size);
  }
  const scale = size / Math.min(src.width, src.height);
  const w = Math.max(size, Math.round(src.width * scale));
  const h = Math.max(size, Math.round(src.height * scale));
  const scaled = w === src.width && h === src.height ? src : resize(src, w, h);
  if (w === size && h === size) return cloneImage(scaled);
  return centerCrop(scaled, size);
}

export function flipHorizontal(src: RawImage): RawImage {
  const out = makeImage(src.width, src.height);
  for (let y = 0; y < src.height; y++) {
    for (let x = 0; x < src.width; x++) {
      const from = (y * src.width + x) * 3;
      const to = (y * src.width + (src.width - 1 - x)) * 3;
      out.data[to] = src.data[from];
      out.data[to + 1] = src.data[from + 1];
      out.data[to + 2] = src.data[from + 2];
    }
  }
  return out;
}

/** Separable Gaussian blur; borders clamp to the edge pixel. */
export function gaussianBlur(src: RawImage, sigma: number): RawImage {
  if (sigma <= 0) return cloneImage(src);
  const radius = Math.max(1, Math.ceil(3 * sigma));
  const kernel = new Float64Array(2 * radius + 1);
  let total = 0;
  for (let i = -radius; i <= radius; i++) {
    const v = Math.exp(-(i * i) / (2 * sigma * sigma));
    kernel[i + radius] = v;
    total += v;
  }
  for (let i = 0; i < kernel.length; i++) kernel[i] /= total;

  const { width, height } = src;
  const horizontal = new Float32Array(src.data.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let i = -radius; i <= radius; i++) {
          const xi = clampIndex(x + i, width - 1);
          acc += kernel[i + radius] * src.data[(y * width + xi) * 3 + c];
        }
        horizontal[(y * width + x) * 3 + c] = acc;
      }
    }
  }
  const out = makeImage(width, height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      for (let c = 0; c < 3; c++) {
        let acc = 0;
        for (let i = -radius; i <= radius; i++) {
          const yi = clampIndex(y + i, height - 1);
          acc += kernel[i + radius] * horizontal[(yi * width + x) * 3 + c];
        }
        out.data[(y * width + x) * 3 + c] = acc;
      }
    }
  }
  return out;
}
