/**
 * Minimal file-system save/load for tfjs LayersModels. The plain
 * @tensorflow/tfjs package has no file:// IO handler (that lives in
 * tfjs-node), so this writes the standard layers-model layout by hand:
 * model.json with the topology plus a weightsManifest pointing at a
 * single weights.bin shard.
 */

import * as fs from 'fs'
import * as path from 'path'
import * as tf from '@tensorflow/tfjs'

export async function saveModel(model: tf.LayersModel, dir: string): Promise<void> {
  fs.mkdirSync(dir, { recursive: true })
  await model.save(
    tf.io.withSaveHandler(async artifacts => {
      const weightData = artifacts.weightData as ArrayBuffer
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData))
      const modelJSON = {
        modelTopology: artifacts.modelTopology,
        format: 'layers-model',
        generatedBy: 'hebbfuse-exporter',
        convertedBy: null,
        weightsManifest: [
          { paths: ['weights.bin'], weights: artifacts.weightSpecs },
        ],
      }
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify(modelJSON, null, 2) + '\n',
      )
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON',
        },
      }
    }),
  )
}

export async function loadModel(modelPath: string): Promise<tf.LayersModel> {
  const jsonPath = modelPath.endsWith('.json')
    ? modelPath
    : path.join(modelPath, 'model.json')
  if (!fs.existsSync(jsonPath)) {
    throw new Error(`model not found: ${jsonPath}`)
  }
  const doc = JSON.parse(fs.readFileSync(jsonPath, 'utf-8'))
  const dir = path.dirname(jsonPath)
  const weightSpecs: tf.io.WeightsManifestEntry[] = []
  const shards: Buffer[] = []
  for (const group of doc.weightsManifest) {
    weightSpecs.push(...group.weights)
    for (const p of group.paths) {
      shards.push(fs.readFileSync(path.join(dir, p)))
    }
  }
  const weightBuffer = Buffer.concat(shards)
  const weightData = weightBuffer.buffer.slice(
    weightBuffer.byteOffset,
    weightBuffer.byteOffset + weightBuffer.byteLength,
  )
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: doc.modelTopology,
      weightSpecs,
      weightData,
    }),
  )
}
