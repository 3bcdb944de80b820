import { execFileSync } from 'child_process'
import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { beforeAll, describe, expect, it } from 'vitest'

import { exportFeatures } from '../src/exporter'
import { main as cliMain } from '../src/cli'
import { writeImageFolder } from '../src/synthImages'

const CAPTURES = ['block1', 'block2', 'embed', 'logits']

function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix))
}

function python(args: string[]): string {
  return execFileSync('python3', ['-m', 'hebbfuse.cli', ...args], {
    encoding: 'utf-8',
  })
}

let imagesDir: string

beforeAll(() => {
  // 10-image toy folder: two pattern classes, five PNGs each
  imagesDir = tmpdir('images-')
  writeImageFolder(imagesDir, ['checker', 'rings'], 5, 7)
})

describe('exportFeatures on the shipped toy-cnn', () => {
  it('captures multiple layers with pooled dims and correct counts', async () => {
    const out = tmpdir('export-')
    const result = await exportFeatures({
      model: 'toy-cnn',
      layers: CAPTURES,
      images: imagesDir,
      out,
    })
    expect(result.sampleCount).toBe(10)
    expect(result.skipped).toBe(0)
    // conv maps reduce to their channel counts, dense layers pass through
    expect(result.layerDims).toEqual({ block1: 8, block2: 16, embed: 24, logits: 4 })
  })

  it('passes the primary toolkit inspect validation', async () => {
    const out = tmpdir('export-')
    const { manifestPath } = await exportFeatures({
      model: 'toy-cnn',
      layers: ['block2', 'embed'],
      images: imagesDir,
      out,
    })
    const summary = python(['inspect', '--manifest', manifestPath, '--format', 'json'])
    const doc = JSON.parse(summary)
    expect(doc.sample_count).toBe(10)
    expect(doc.class_names).toEqual(['checker', 'rings'])
    expect(doc.layers).toEqual([
      { name: 'block2', dim: 16 },
      { name: 'embed', dim: 24 },
    ])
  })

  it('feeds a successful eval run in the primary toolkit', async () => {
    const out = tmpdir('export-')
    const { manifestPath } = await exportFeatures({
      model: 'toy-cnn',
      layers: ['block2', 'embed'],
      images: imagesDir,
      out,
    })
    const report = JSON.parse(
      python([
        'eval', '--manifest', manifestPath,
        '--learner', 'hebbian', '--layers', 'block2,embed',
        '--ways', '2', '--shots', '1', '--queries', '1',
        '--episodes', '6', '--seed', '3', '--steps', '60',
      ]),
    )
    expect(report.results.per_episode_accuracies).toHaveLength(6)
    expect(report.results.mean_accuracy).toBeGreaterThanOrEqual(0)
    expect(report.results.mean_accuracy).toBeLessThanOrEqual(1)
  })

  it('re-exports byte-identically', async () => {
    const outA = tmpdir('export-')
    const outB = tmpdir('export-')
    await exportFeatures({ model: 'toy-cnn', layers: CAPTURES, images: imagesDir, out: outA })
    await exportFeatures({ model: 'toy-cnn', layers: CAPTURES, images: imagesDir, out: outB })
    const names = fs.readdirSync(outA).sort()
    expect(fs.readdirSync(outB).sort()).toEqual(names)
    for (const name of names) {
      const a = fs.readFileSync(path.join(outA, name))
      const b = fs.readFileSync(path.join(outB, name))
      expect(a.equals(b), `${name} differs between exports`).toBe(true)
    }
  })

  it('rejects unknown capture points, listing what exists', async () => {
    await expect(
      exportFeatures({
        model: 'toy-cnn',
        layers: ['block9'],
        images: imagesDir,
        out: tmpdir('export-'),
      }),
    ).rejects.toThrow(/unknown layer "block9".*block1/s)
  })

  it('skips undecodable images with a count', async () => {
    const dir = tmpdir('images-')
    writeImageFolder(dir, ['checker', 'rings'], 3, 99)
    fs.writeFileSync(path.join(dir, 'checker', 'broken.png'), 'not a png')
    const warnings: string[] = []
    const origWarn = console.warn
    console.warn = (msg: string) => warnings.push(msg)
    try {
      const result = await exportFeatures({
        model: 'toy-cnn',
        layers: ['embed'],
        images: dir,
        out: tmpdir('export-'),
      })
      expect(result.sampleCount).toBe(6)
      expect(result.skipped).toBe(1)
    } finally {
      console.warn = origWarn
    }
    expect(warnings.some(w => w.includes('broken.png'))).toBe(true)
  })
})

describe('cli', () => {
  it('exports end to end and reports a summary', async () => {
    const out = tmpdir('export-')
    const logs: string[] = []
    const origLog = console.log
    console.log = (msg: string) => logs.push(msg)
    try {
      const code = await cliMain([
        'export', '--model', 'toy-cnn', '--layers', 'block1,logits',
        '--images', imagesDir, '--out', out, '--batch-size', '4',
      ])
      expect(code).toBe(0)
    } finally {
      console.log = origLog
    }
    expect(fs.existsSync(path.join(out, 'manifest.json'))).toBe(true)
    expect(logs.join('\n')).toContain('samples: 10')
  })

  it('returns 2 on missing required flags', async () => {
    const origErr = console.error
    console.error = () => undefined
    try {
      expect(await cliMain(['export', '--model', 'toy-cnn'])).toBe(2)
      expect(await cliMain(['bogus'])).toBe(2)
    } finally {
      console.error = origErr
    }
  })
})
