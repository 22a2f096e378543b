/*
 * Store-format writer: a JSON manifest next to a raw little-endian
 * float32 data file, bit-exact against what the evaluation toolkit
 * loads.  Records are frames_per_sample consecutive dz vectors; sample
 * entries point at record indices.  Output order is fully determined by
 * content (instruments sorted by id, samples by grid cell), so
 * extracting the same corpus twice reproduces both files byte for byte.
 */

import fs from 'fs';
import path from 'path';

import { gridIndex } from './grid.js';

export const MANIFEST_VERSION = 1;
export const UNIT_NORM_TOL = 1e-6;

export interface StoreRecord {
  instrumentId: string;
  family?: string;
  source?: string;
  pitch: number;
  velocity: number;
  frames: Float32Array[];
}

interface Sample {
  cell: number;
  pitch: number;
  velocity: number;
  frames: Float32Array[];
}

interface Instrument {
  family?: string;
  source?: string;
  samples: Sample[];
}

function checkFrames(rec: StoreRecord, dz: number, framesPerSample: number): void {
  const where = `instrument ${JSON.stringify(rec.instrumentId)} pitch ${rec.pitch} velocity ${rec.velocity}`;
  if (rec.frames.length !== framesPerSample) {
    throw new Error(`${where}: got ${rec.frames.length} frames, expected ${framesPerSample}`);
  }
  for (const frame of rec.frames) {
    if (frame.length !== dz) {
      throw new Error(`${where}: frame has ${frame.length} dims, expected dz=${dz}`);
    }
    let acc = 0;
    for (let i = 0; i < dz; i++) {
      if (!Number.isFinite(frame[i])) throw new Error(`${where}: non-finite frame value`);
      acc += frame[i] * frame[i];
    }
    if (Math.abs(Math.sqrt(acc) - 1) > UNIT_NORM_TOL) {
      throw new Error(`${where}: frame norm ${Math.sqrt(acc).toFixed(8)} is not 1`);
    }
  }
}

export function writeStore(
  records: StoreRecord[],
  dz: number,
  framesPerSample: number,
  manifestPath: string,
  dataFile?: string,
): { manifestPath: string; dataPath: string; samples: number } {
  if (records.length === 0) throw new Error('nothing to write: no records');

  const byInstrument = new Map<string, Instrument>();
  for (const rec of records) {
    checkFrames(rec, dz, framesPerSample);
    const cell = gridIndex(rec.pitch, rec.velocity);
    let inst = byInstrument.get(rec.instrumentId);
    if (inst === undefined) {
      inst = { family: rec.family, source: rec.source, samples: [] };
      byInstrument.set(rec.instrumentId, inst);
    } else if (inst.family !== rec.family || inst.source !== rec.source) {
      throw new Error(
        `instrument ${JSON.stringify(rec.instrumentId)} has conflicting family/source metadata`
      );
    }
    if (inst.samples.some((s) => s.cell === cell)) {
      throw new Error(
        `instrument ${JSON.stringify(rec.instrumentId)} repeats cell (${rec.pitch}, ${rec.velocity})`
      );
    }
    inst.samples.push({ cell, pitch: rec.pitch, velocity: rec.velocity, frames: rec.frames });
  }

  const ids = [...byInstrument.keys()].sort();
  const name = dataFile ?? `${path.basename(manifestPath).replace(/\.json$/, '')}.f32`;

  const nSamples = records.length;
  const data = Buffer.alloc(nSamples * framesPerSample * dz * 4);
  const instruments: object[] = [];
  let index = 0;
  let byteOff = 0;
  for (const id of ids) {
    const inst = byInstrument.get(id)!;
    inst.samples.sort((a, b) => a.cell - b.cell);
    const entry: Record<string, unknown> = { id };
    if (inst.family !== undefined) entry.family = inst.family;
    if (inst.source !== undefined) entry.source = inst.source;
    const samples: object[] = [];
    for (const s of inst.samples) {
      samples.push({ pitch: s.pitch, velocity: s.velocity, index });
      index += 1;
      for (const frame of s.frames) {
        for (let i = 0; i < dz; i++) {
          data.writeFloatLE(frame[i], byteOff);
          byteOff += 4;
        }
      }
    }
    entry.samples = samples;
    instruments.push(entry);
  }

  const doc = {
    version: MANIFEST_VERSION,
    dz,
    frames_per_sample: framesPerSample,
    dtype: 'f32le',
    data_file: name,
    instruments,
  };

  const dataPath = path.join(path.dirname(manifestPath), name);
  fs.mkdirSync(path.dirname(manifestPath), { recursive: true });
  fs.writeFileSync(dataPath, data);
  fs.writeFileSync(manifestPath, JSON.stringify(doc, null, 2) + '\n');
  return { manifestPath, dataPath, samples: nSamples };
}
