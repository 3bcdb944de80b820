/**
 * Writer for the hebbfuse feature-store format. The byte layout is the
 * toolkit's public contract and must match its reader exactly:
 *
 *   tensor file:  "CHEF" | u32 version=1 | u32 rows | u32 cols
 *                 | rows*cols float32, little-endian, row-major
 *   labels file:  "CHFL" | u32 version=1 | u32 count | count u32
 *   manifest:     JSON {version, split_name, class_names, sample_count,
 *                       layers: [{name, dim, path}], labels_path}
 *
 * Paths in the manifest are relative to its directory.
 */

import * as fs from 'fs'
import * as path from 'path'

export const FORMAT_VERSION = 1

export interface LayerMatrix {
  name: string
  /** row-major [rows][cols] */
  data: Float32Array
  rows: number
  cols: number
}

export interface FeatureSetOnDisk {
  splitName: string
  classNames: string[]
  layers: LayerMatrix[]
  labels: Uint32Array
}

function sanitize(name: string): string {
  return name.replace(/[^A-Za-z0-9_.-]/g, '_')
}

function encodeTensor(layer: LayerMatrix): Buffer {
  if (layer.data.length !== layer.rows * layer.cols) {
    throw new Error(
      `layer ${layer.name}: data length ${layer.data.length} != ` +
        `${layer.rows}x${layer.cols}`,
    )
  }
  for (const v of layer.data) {
    if (!Number.isFinite(v)) {
      throw new Error(`layer ${layer.name}: non-finite value in features`)
    }
  }
  const header = Buffer.alloc(16)
  header.write('CHEF', 0, 'ascii')
  header.writeUInt32LE(FORMAT_VERSION, 4)
  header.writeUInt32LE(layer.rows, 8)
  header.writeUInt32LE(layer.cols, 12)
  const payload = Buffer.alloc(layer.data.length * 4)
  for (let i = 0; i < layer.data.length; i++) {
    payload.writeFloatLE(layer.data[i], i * 4)
  }
  return Buffer.concat([header, payload])
}

function encodeLabels(labels: Uint32Array): Buffer {
  const header = Buffer.alloc(12)
  header.write('CHFL', 0, 'ascii')
  header.writeUInt32LE(FORMAT_VERSION, 4)
  header.writeUInt32LE(labels.length, 8)
  const payload = Buffer.alloc(labels.length * 4)
  for (let i = 0; i < labels.length; i++) {
    payload.writeUInt32LE(labels[i], i * 4)
  }
  return Buffer.concat([header, payload])
}

export function writeFeatureSet(set: FeatureSetOnDisk, dir: string): string {
  if (set.layers.length === 0) {
    throw new Error('feature set has no layers')
  }
  const n = set.labels.length
  for (const layer of set.layers) {
    if (layer.rows !== n) {
      throw new Error(
        `layer ${layer.name} has ${layer.rows} rows, labels have ${n}`,
      )
    }
  }
  for (const label of set.labels) {
    if (label >= set.classNames.length) {
      throw new Error(`label ${label} out of range`)
    }
  }
  fs.mkdirSync(dir, { recursive: true })

  const layerEntries = set.layers.map((layer, i) => {
    const fileName = `layer${String(i).padStart(2, '0')}_${sanitize(layer.name)}.feat`
    fs.writeFileSync(path.join(dir, fileName), encodeTensor(layer))
    return { name: layer.name, dim: layer.cols, path: fileName }
  })
  fs.writeFileSync(path.join(dir, 'labels.lab'), encodeLabels(set.labels))

  const manifest = {
    version: FORMAT_VERSION,
    split_name: set.splitName,
    class_names: set.classNames,
    sample_count: n,
    layers: layerEntries,
    labels_path: 'labels.lab',
  }
  const manifestPath = path.join(dir, 'manifest.json')
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n')
  return manifestPath
}
