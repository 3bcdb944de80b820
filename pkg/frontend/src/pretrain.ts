/**
 * Builds and trains the small CNN that ships with the exporter, then
 * saves it under models/toy-cnn. Training data is synthetic (four
 * pattern classes) and every source of randomness is seeded, so the
 * saved weights are reproducible in a fixed environment.
 *
 * Capture points of interest: block1/block2 (conv outputs, reduced by
 * global average pooling at export time), embed (penultimate dense),
 * logits (pre-softmax scores).
 */

import * as path from 'path'
import * as tf from '@tensorflow/tfjs'
import { saveModel } from './modelIO'
import { PATTERN_CLASSES, renderDataset } from './synthImages'

const SIZE = 32
const PER_CLASS = 40
const EPOCHS = 30
const SEED = 42

export function buildToyCnn(nClasses: number): tf.LayersModel {
  const input = tf.input({ shape: [SIZE, SIZE, 3] })
  let x = tf
    .layers.conv2d({
      name: 'block1',
      filters: 8,
      kernelSize: 3,
      padding: 'same',
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: SEED }),
    })
    .apply(input) as tf.SymbolicTensor
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor
  x = tf
    .layers.conv2d({
      name: 'block2',
      filters: 16,
      kernelSize: 3,
      padding: 'same',
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: SEED + 1 }),
    })
    .apply(x) as tf.SymbolicTensor
  x = tf.layers.maxPooling2d({ poolSize: 2 }).apply(x) as tf.SymbolicTensor
  x = tf.layers.flatten().apply(x) as tf.SymbolicTensor
  x = tf
    .layers.dense({
      name: 'embed',
      units: 24,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: SEED + 2 }),
    })
    .apply(x) as tf.SymbolicTensor
  const logits = tf
    .layers.dense({
      name: 'logits',
      units: nClasses,
      kernelInitializer: tf.initializers.glorotUniform({ seed: SEED + 3 }),
    })
    .apply(x) as tf.SymbolicTensor
  const probs = tf.layers.softmax({ name: 'probs' }).apply(logits) as tf.SymbolicTensor
  return tf.model({ inputs: input, outputs: probs })
}

export async function pretrain(outDir: string): Promise<number> {
  const { pixels, labels, count } = renderDataset(PATTERN_CLASSES, PER_CLASS, 1, SIZE)
  const xs = tf.tensor4d(pixels, [count, SIZE, SIZE, 3])
  const ys = tf.oneHot(tf.tensor1d(labels, 'int32'), PATTERN_CLASSES.length)

  const model = buildToyCnn(PATTERN_CLASSES.length)
  model.compile({
    optimizer: tf.train.adam(1e-3),
    loss: 'categoricalCrossentropy',
    metrics: ['accuracy'],
  })
  // shuffle=false keeps the run deterministic
  await model.fit(xs, ys, { epochs: EPOCHS, batchSize: 16, shuffle: false, verbose: 0 })

  const evalOut = model.evaluate(xs, ys) as tf.Scalar[]
  const acc = (await evalOut[1].data())[0]
  await saveModel(model, outDir)
  xs.dispose()
  ys.dispose()
  return acc
}

if (require.main === module) {
  const outDir = path.join(__dirname, '..', 'models', 'toy-cnn')
  pretrain(outDir).then(acc => {
    console.log(`saved ${outDir} (training accuracy ${acc.toFixed(3)})`)
  })
}
