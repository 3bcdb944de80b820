/**
 * Command line: export features from a stored model over an image folder.
 *
 *   export --model <registry-id|path> --layers <names> --images <dir>
 *          --out <dir> [--batch-size N] [--split-name NAME]
 */

import * as process from 'process'
import { exportFeatures, modelRegistry } from './exporter'

function parseArgs(argv: string[]): Record<string, string> {
  const args: Record<string, string> = {}
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i]
    if (!a.startsWith('--')) {
      throw new Error(`unexpected argument: ${a}`)
    }
    const key = a.slice(2)
    const value = argv[i + 1]
    if (value === undefined || value.startsWith('--')) {
      throw new Error(`missing value for --${key}`)
    }
    args[key] = value
    i++
  }
  return args
}

export async function main(argv: string[]): Promise<number> {
  if (argv[0] !== 'export') {
    console.error(
      'usage: export --model <id|path> --layers <names> --images <dir> ' +
        '--out <dir> [--batch-size N] [--split-name NAME]\n' +
        `registry models: ${Object.keys(modelRegistry).join(', ')}`,
    )
    return 2
  }
  let args: Record<string, string>
  try {
    args = parseArgs(argv.slice(1))
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 2
  }
  for (const required of ['model', 'layers', 'images', 'out']) {
    if (!(required in args)) {
      console.error(`error: --${required} is required`)
      return 2
    }
  }
  try {
    const result = await exportFeatures({
      model: args['model'],
      layers: args['layers'].split(',').map(s => s.trim()).filter(Boolean),
      images: args['images'],
      out: args['out'],
      batchSize: args['batch-size'] ? parseInt(args['batch-size'], 10) : undefined,
      splitName: args['split-name'],
    })
    console.log(`wrote ${result.manifestPath}`)
    console.log(
      `samples: ${result.sampleCount} (skipped ${result.skipped}); layers: ` +
        Object.entries(result.layerDims)
          .map(([name, dim]) => `${name}(${dim})`)
          .join(', '),
    )
    return 0
  } catch (err) {
    console.error(`error: ${(err as Error).message}`)
    return 1
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then(code => {
    if (code !== 0) {
      process.exit(code)
    }
  })
}
