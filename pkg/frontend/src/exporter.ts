/**
 * Activates a stored vision model on an image folder, captures the named
 * intermediate layers, reduces spatial maps to per-channel vectors by
 * global average pooling, and writes the feature-store format.
 *
 * Captures are layer OUTPUTS (post-activation); 4-D activations
 * [batch, h, w, c] become c-dimensional vectors, 2-D activations pass
 * through unchanged. Exports are deterministic given (model weights,
 * folder contents, spec): directories and files are walked in sorted
 * order and batches have fixed composition.
 */

import * as path from 'path'
import * as tf from '@tensorflow/tfjs'
import { decodePng, listImageFolder, prepareImage } from './images'
import { loadModel } from './modelIO'
import { writeFeatureSet, LayerMatrix } from './featureStore'

export interface ExportSpec {
  /** registry name (see modelRegistry) or path to a model.json / its dir */
  model: string
  /** capture points: layer names of the loaded model */
  layers: string[]
  /** folder with one subdirectory per class */
  images: string
  out: string
  batchSize?: number
  splitName?: string
}

export interface ModelEntry {
  path: string
  inputSize: number
}

/** Models shipped with this package (pretrained by `npm run pretrain`). */
export const modelRegistry: Record<string, ModelEntry> = {
  'toy-cnn': {
    path: path.join(__dirname, '..', 'models', 'toy-cnn'),
    inputSize: 32,
  },
}

export interface ExportResult {
  manifestPath: string
  sampleCount: number
  skipped: number
  layerDims: Record<string, number>
}

function resolveModel(name: string): ModelEntry {
  if (name in modelRegistry) {
    return modelRegistry[name]
  }
  // treat as a path; input size is read off the model itself
  return { path: name, inputSize: 0 }
}

export async function exportFeatures(spec: ExportSpec): Promise<ExportResult> {
  if (spec.layers.length === 0) {
    throw new Error('need at least one capture point')
  }
  const entry = resolveModel(spec.model)
  const model = await loadModel(entry.path)
  const inputShape = model.inputs[0].shape
  const inputSize = entry.inputSize || (inputShape[1] as number)

  const available = model.layers.map(l => l.name)
  for (const name of spec.layers) {
    if (!available.includes(name)) {
      throw new Error(
        `unknown layer ${JSON.stringify(name)}; available: ${available.join(', ')}`,
      )
    }
  }
  const capture = tf.model({
    inputs: model.inputs,
    outputs: spec.layers.map(name => model.getLayer(name).output as tf.SymbolicTensor),
  })

  const folder = listImageFolder(spec.images)
  const batchSize = spec.batchSize ?? 16
  const n = folder.files.length

  const perLayer: Float32Array[][] = spec.layers.map(() => [])
  for (let start = 0; start < n; start += batchSize) {
    const batchFiles = folder.files.slice(start, start + batchSize)
    const batch = tf.tidy(() =>
      tf.stack(
        batchFiles.map(f => prepareImage(decodePng(f.path)!, inputSize)),
      ),
    )
    const outputs = capture.predict(batch) as tf.Tensor | tf.Tensor[]
    const outputList = Array.isArray(outputs) ? outputs : [outputs]
    outputList.forEach((out, li) => {
      const reduced = tf.tidy(() => {
        if (out.rank === 4) {
          return tf.mean(out, [1, 2]) // global average pool over h, w
        }
        if (out.rank === 2) {
          return out.clone()
        }
        throw new Error(
          `layer ${spec.layers[li]}: unsupported activation rank ${out.rank}`,
        )
      })
      const rows = reduced.shape[0] as number
      const cols = reduced.shape[1] as number
      const data = reduced.dataSync() as Float32Array
      for (let r = 0; r < rows; r++) {
        perLayer[li].push(data.slice(r * cols, (r + 1) * cols))
      }
      reduced.dispose()
    })
    outputList.forEach(t => t.dispose())
    batch.dispose()
  }

  const layers: LayerMatrix[] = spec.layers.map((name, li) => {
    const rows = perLayer[li].length
    const cols = perLayer[li][0].length
    const data = new Float32Array(rows * cols)
    perLayer[li].forEach((row, r) => data.set(row, r * cols))
    return { name, data, rows, cols }
  })

  const manifestPath = writeFeatureSet(
    {
      splitName: spec.splitName ?? 'export',
      classNames: folder.classNames,
      layers,
      labels: Uint32Array.from(folder.files.map(f => f.label)),
    },
    spec.out,
  )
  return {
    manifestPath,
    sampleCount: n,
    skipped: folder.skipped,
    layerDims: Object.fromEntries(layers.map(l => [l.name, l.cols])),
  }
}
