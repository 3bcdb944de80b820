/**
 * Deterministic synthetic image families for pretraining and tests.
 * Four visually distinct 32x32 RGB pattern classes; every pixel is a
 * pure function of (seed, image index, x, y), so regenerated folders
 * are byte-identical.
 */

import * as fs from 'fs'
import * as path from 'path'
import { PNG } from 'pngjs'

export const PATTERN_CLASSES = ['checker', 'diag', 'gradient', 'rings'] as const
export type PatternClass = (typeof PATTERN_CLASSES)[number]

/** mulberry32: small, seedable, good enough for texture jitter */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a |= 0
    a = (a + 0x6d2b79f5) | 0
    let t = Math.imul(a ^ (a >>> 15), 1 | a)
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

export function renderPattern(
  cls: PatternClass,
  seed: number,
  size = 32,
): PNG {
  const rng = mulberry32(seed)
  const phase = rng() * size
  const scale = 3 + Math.floor(rng() * 4)
  const tint = [0.5 + 0.5 * rng(), 0.5 + 0.5 * rng(), 0.5 + 0.5 * rng()]
  const noise = 0.1

  const png = new PNG({ width: size, height: size })
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      let v: number
      switch (cls) {
        case 'checker':
          v = (Math.floor((x + phase) / scale) + Math.floor((y + phase) / scale)) % 2
          break
        case 'diag':
          v = Math.floor((x + y + phase) / scale) % 2
          break
        case 'gradient':
          v = (x + phase) % size / size
          break
        case 'rings': {
          const dx = x - size / 2
          const dy = y - size / 2
          v = Math.floor((Math.sqrt(dx * dx + dy * dy) + phase) / scale) % 2
          break
        }
      }
      v = Math.min(1, Math.max(0, v + noise * (rng() - 0.5)))
      const idx = (y * size + x) * 4
      png.data[idx] = Math.round(255 * v * tint[0])
      png.data[idx + 1] = Math.round(255 * v * tint[1])
      png.data[idx + 2] = Math.round(255 * v * tint[2])
      png.data[idx + 3] = 255
    }
  }
  return png
}

/** Per-class subdirectories of PNGs, the layout the exporter consumes. */
export function writeImageFolder(
  root: string,
  classes: readonly PatternClass[],
  perClass: number,
  baseSeed = 1,
  size = 32,
): void {
  classes.forEach((cls, ci) => {
    const dir = path.join(root, cls)
    fs.mkdirSync(dir, { recursive: true })
    for (let i = 0; i < perClass; i++) {
      const png = renderPattern(cls, baseSeed + ci * 1000 + i, size)
      fs.writeFileSync(
        path.join(dir, `img${String(i).padStart(3, '0')}.png`),
        PNG.sync.write(png),
      )
    }
  })
}

/** Flat tensors + labels for pretraining, same pixel source as the folders. */
export function renderDataset(
  classes: readonly PatternClass[],
  perClass: number,
  baseSeed = 1,
  size = 32,
): { pixels: Float32Array; labels: number[]; count: number } {
  const count = classes.length * perClass
  const pixels = new Float32Array(count * size * size * 3)
  const labels: number[] = []
  let cursor = 0
  classes.forEach((cls, ci) => {
    for (let i = 0; i < perClass; i++) {
      const png = renderPattern(cls, baseSeed + ci * 1000 + i, size)
      for (let p = 0; p < size * size; p++) {
        pixels[cursor++] = png.data[p * 4] / 255
        pixels[cursor++] = png.data[p * 4 + 1] / 255
        pixels[cursor++] = png.data[p * 4 + 2] / 255
      }
      labels.push(ci)
    }
  })
  return { pixels, labels, count }
}
