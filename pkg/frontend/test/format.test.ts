import fs from 'fs';
import path from 'path';

import { describe, expect, it } from 'vitest';

import { l2Normalize } from '../src/encoder.js';
import { StoreRecord, writeStore } from '../src/format.js';
import { GRID_CELLS, gridIndex } from '../src/grid.js';
import { TEST_DZ, tmpdir } from './helpers.js';

function unitVec(dz: number, hot: number): Float32Array {
  const v = new Float32Array(dz);
  v[hot % dz] = 2;
  v[(hot + 1) % dz] = 1;
  return l2Normalize(v);
}

function rec(id: string, pitch: number, velocity: number, hot: number): StoreRecord {
  return { instrumentId: id, pitch, velocity, frames: [unitVec(TEST_DZ, hot)] };
}

describe('gridIndex', () => {
  it('orders cells pitch-major', () => {
    expect(gridIndex(21, 25)).toBe(0);
    expect(gridIndex(21, 127)).toBe(4);
    expect(gridIndex(60, 100)).toBe(198);
    expect(gridIndex(108, 127)).toBe(GRID_CELLS - 1);
  });

  it('rejects out-of-range keys', () => {
    expect(() => gridIndex(109, 100)).toThrow(/pitch 109 outside the 88-key range \[21, 108\]/);
    expect(() => gridIndex(20, 100)).toThrow(/88-key range/);
    expect(() => gridIndex(60, 64)).toThrow(/velocity 64 not in 25, 50, 75, 100, 127/);
  });
});

describe('writeStore', () => {
  it('writes a loadable manifest and a 4-byte-per-float data file', () => {
    const dir = tmpdir('store');
    const out = writeStore(
      [rec('b', 60, 100, 0), rec('a', 21, 25, 1), rec('a', 60, 100, 2)],
      TEST_DZ, 1, path.join(dir, 'pop.json'),
    );
    expect(out.samples).toBe(3);
    expect(fs.statSync(out.dataPath).size).toBe(3 * TEST_DZ * 4);

    const doc = JSON.parse(fs.readFileSync(out.manifestPath, 'utf-8'));
    expect(doc.version).toBe(1);
    expect(doc.dz).toBe(TEST_DZ);
    expect(doc.frames_per_sample).toBe(1);
    expect(doc.dtype).toBe('f32le');
    expect(doc.data_file).toBe('pop.f32');
    // instruments sorted by id, samples by cell, record indices sequential
    expect(doc.instruments.map((i: { id: string }) => i.id)).toEqual(['a', 'b']);
    expect(doc.instruments[0].samples).toEqual([
      { pitch: 21, velocity: 25, index: 0 },
      { pitch: 60, velocity: 100, index: 1 },
    ]);
    expect(doc.instruments[1].samples).toEqual([{ pitch: 60, velocity: 100, index: 2 }]);
  });

  it('carries family and source through', () => {
    const dir = tmpdir('store');
    const r: StoreRecord = {
      instrumentId: 'keyboard_acoustic_000', family: 'keyboard', source: 'acoustic',
      pitch: 60, velocity: 100, frames: [unitVec(TEST_DZ, 0)],
    };
    const out = writeStore([r], TEST_DZ, 1, path.join(dir, 'pop.json'));
    const doc = JSON.parse(fs.readFileSync(out.manifestPath, 'utf-8'));
    expect(doc.instruments[0].family).toBe('keyboard');
    expect(doc.instruments[0].source).toBe('acoustic');
  });

  it('is deterministic across record order', () => {
    const a = tmpdir('store');
    const b = tmpdir('store');
    const records = [rec('b', 60, 100, 0), rec('a', 21, 25, 1), rec('a', 60, 100, 2)];
    writeStore(records, TEST_DZ, 1, path.join(a, 'pop.json'));
    writeStore([...records].reverse(), TEST_DZ, 1, path.join(b, 'pop.json'));
    expect(fs.readFileSync(path.join(b, 'pop.json'), 'utf-8'))
      .toBe(fs.readFileSync(path.join(a, 'pop.json'), 'utf-8'));
    expect(fs.readFileSync(path.join(b, 'pop.f32')).equals(fs.readFileSync(path.join(a, 'pop.f32'))))
      .toBe(true);
  });

  it('rejects duplicate cells per instrument', () => {
    expect(() => writeStore(
      [rec('a', 60, 100, 0), rec('a', 60, 100, 1)],
      TEST_DZ, 1, path.join(tmpdir('store'), 'pop.json'),
    )).toThrow(/repeats cell \(60, 100\)/);
  });

  it('rejects frames that are not unit norm', () => {
    const bad: StoreRecord = {
      instrumentId: 'a', pitch: 60, velocity: 100,
      frames: [new Float32Array(TEST_DZ).fill(0.5)],
    };
    expect(() => writeStore([bad], TEST_DZ, 1, path.join(tmpdir('store'), 'pop.json')))
      .toThrow(/norm .* is not 1/);
  });

  it('rejects frame count and dimension mismatches', () => {
    expect(() => writeStore([rec('a', 60, 100, 0)], TEST_DZ, 4, path.join(tmpdir('store'), 'p.json')))
      .toThrow(/got 1 frames, expected 4/);
    expect(() => writeStore([rec('a', 60, 100, 0)], TEST_DZ + 1, 1, path.join(tmpdir('store'), 'p.json')))
      .toThrow(/dims, expected dz=17/);
  });

  it('rejects conflicting instrument metadata', () => {
    const r1: StoreRecord = { ...rec('a', 60, 100, 0), family: 'keyboard' };
    const r2: StoreRecord = { ...rec('a', 64, 100, 1), family: 'string' };
    expect(() => writeStore([r1, r2], TEST_DZ, 1, path.join(tmpdir('store'), 'p.json')))
      .toThrow(/conflicting family\/source/);
  });

  it('rejects keys off the grid with the range rule', () => {
    expect(() => writeStore([rec('a', 109, 100, 0)], TEST_DZ, 1, path.join(tmpdir('store'), 'p.json')))
      .toThrow(/pitch 109 outside the 88-key range/);
  });
});
