/**
 * Image-folder loading: one subdirectory per class, labels assigned by
 * lexicographic subdirectory order. Only PNG files are decoded; files
 * that fail to decode are skipped (counted, with a warning) rather than
 * aborting the export. Images are center-cropped to a square and
 * bilinearly resized to the model's input size; pixel values are scaled
 * to [0, 1].
 */

import * as fs from 'fs'
import * as path from 'path'
import * as tf from '@tensorflow/tfjs'
import { PNG } from 'pngjs'

export interface ImageFolder {
  classNames: string[]
  /** one entry per successfully decoded image, folder-sorted order */
  files: { path: string; label: number }[]
  skipped: number
}

export function listImageFolder(
  root: string,
  warn: (msg: string) => void = msg => console.warn(msg),
): ImageFolder {
  if (!fs.existsSync(root)) {
    throw new Error(`image folder not found: ${root}`)
  }
  const classNames = fs
    .readdirSync(root, { withFileTypes: true })
    .filter(e => e.isDirectory())
    .map(e => e.name)
    .sort()
  if (classNames.length === 0) {
    throw new Error(`no class subdirectories under ${root}`)
  }
  const files: { path: string; label: number }[] = []
  let skipped = 0
  classNames.forEach((cls, label) => {
    const dir = path.join(root, cls)
    const names = fs
      .readdirSync(dir)
      .filter(n => fs.statSync(path.join(dir, n)).isFile())
      .sort()
    if (names.length === 0) {
      throw new Error(`class directory ${dir} has no files`)
    }
    for (const name of names) {
      const p = path.join(dir, name)
      if (decodePng(p) === null) {
        warn(`skipping undecodable image: ${p}`)
        skipped++
        continue
      }
      files.push({ path: p, label })
    }
  })
  if (files.length === 0) {
    throw new Error(`no decodable images under ${root}`)
  }
  return { classNames, files, skipped }
}

export function decodePng(filePath: string): PNG | null {
  try {
    return PNG.sync.read(fs.readFileSync(filePath))
  } catch {
    return null
  }
}

/** H x W x 3 float tensor in [0, 1]; alpha is dropped. */
export function pngToTensor(png: PNG): tf.Tensor3D {
  const { width, height, data } = png
  const rgb = new Float32Array(width * height * 3)
  for (let i = 0; i < width * height; i++) {
    rgb[i * 3] = data[i * 4] / 255
    rgb[i * 3 + 1] = data[i * 4 + 1] / 255
    rgb[i * 3 + 2] = data[i * 4 + 2] / 255
  }
  return tf.tensor3d(rgb, [height, width, 3])
}

/** Center-crop to square, then bilinear-resize to size x size. */
export function prepareImage(png: PNG, size: number): tf.Tensor3D {
  return tf.tidy(() => {
    let img = pngToTensor(png)
    const [h, w] = img.shape
    const side = Math.min(h, w)
    const top = Math.floor((h - side) / 2)
    const left = Math.floor((w - side) / 2)
    img = tf.slice(img, [top, left, 0], [side, side, 3])
    if (side === size) {
      return img
    }
    return tf.image.resizeBilinear(img, [size, size])
  })
}
