import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { describe, expect, it } from 'vitest'

import { writeFeatureSet, FeatureSetOnDisk } from '../src/featureStore'

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), 'feat-'))
}

function smallSet(): FeatureSetOnDisk {
  return {
    splitName: 'unit',
    classNames: ['a', 'b'],
    layers: [
      {
        name: 'l0',
        data: Float32Array.from([1, 2, 3, 4, 5, 6]),
        rows: 3,
        cols: 2,
      },
    ],
    labels: Uint32Array.from([0, 1, 0]),
  }
}

describe('writeFeatureSet', () => {
  it('writes the exact tensor header and little-endian payload', () => {
    const dir = tmpdir()
    writeFeatureSet(smallSet(), dir)
    const blob = fs.readFileSync(path.join(dir, 'layer00_l0.feat'))
    expect(blob.length).toBe(16 + 6 * 4)
    expect(blob.subarray(0, 4).toString('ascii')).toBe('CHEF')
    expect(blob.readUInt32LE(4)).toBe(1) // version
    expect(blob.readUInt32LE(8)).toBe(3) // rows
    expect(blob.readUInt32LE(12)).toBe(2) // cols
    expect(blob.readFloatLE(16)).toBe(1)
    expect(blob.readFloatLE(16 + 5 * 4)).toBe(6)
  })

  it('writes the labels file layout', () => {
    const dir = tmpdir()
    writeFeatureSet(smallSet(), dir)
    const blob = fs.readFileSync(path.join(dir, 'labels.lab'))
    expect(blob.subarray(0, 4).toString('ascii')).toBe('CHFL')
    expect(blob.readUInt32LE(4)).toBe(1)
    expect(blob.readUInt32LE(8)).toBe(3)
    expect(blob.readUInt32LE(12)).toBe(0)
    expect(blob.readUInt32LE(16)).toBe(1)
    expect(blob.readUInt32LE(20)).toBe(0)
  })

  it('writes a manifest with relative paths', () => {
    const dir = tmpdir()
    const manifestPath = writeFeatureSet(smallSet(), dir)
    const doc = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'))
    expect(doc.version).toBe(1)
    expect(doc.split_name).toBe('unit')
    expect(doc.class_names).toEqual(['a', 'b'])
    expect(doc.sample_count).toBe(3)
    expect(doc.layers).toEqual([{ name: 'l0', dim: 2, path: 'layer00_l0.feat' }])
    expect(doc.labels_path).toBe('labels.lab')
  })

  it('rejects empty layer lists', () => {
    const set = smallSet()
    set.layers = []
    expect(() => writeFeatureSet(set, tmpdir())).toThrow(/no layers/)
  })

  it('rejects row count mismatches', () => {
    const set = smallSet()
    set.labels = Uint32Array.from([0, 1])
    expect(() => writeFeatureSet(set, tmpdir())).toThrow(/rows/)
  })

  it('rejects out-of-range labels', () => {
    const set = smallSet()
    set.labels = Uint32Array.from([0, 2, 0])
    expect(() => writeFeatureSet(set, tmpdir())).toThrow(/out of range/)
  })

  it('rejects non-finite values', () => {
    const set = smallSet()
    set.layers[0].data[2] = NaN
    expect(() => writeFeatureSet(set, tmpdir())).toThrow(/non-finite/)
  })
})
