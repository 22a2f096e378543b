/*
 * Shared fixtures: synthetic tones, tiny WAV files, and a 3-file toy
 * corpus in NSynth layout (two instruments, three notes).
 */

import fs from 'fs';
import os from 'os';
import path from 'path';

import { encodeWavPcm16 } from '../src/wav.js';

export const TEST_RATE = 8000;
export const TEST_DZ = 16;

export function tmpdir(tag: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), `extractor-${tag}-`));
}

export function pitchHz(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

/* Decaying tone with a couple of harmonics; amplitude scaled by velocity. */
export function tone(pitch: number, velocity: number, seconds = 0.5, rate = TEST_RATE): Float32Array {
  const n = Math.round(seconds * rate);
  const out = new Float32Array(n);
  const hz = pitchHz(pitch);
  const amp = 0.2 + 0.5 * (velocity / 127);
  for (let i = 0; i < n; i++) {
    const t = i / rate;
    const env = Math.exp(-3 * t);
    out[i] = amp * env * (
      Math.sin(2 * Math.PI * hz * t) +
      0.4 * Math.sin(2 * Math.PI * 2 * hz * t) +
      0.15 * Math.sin(2 * Math.PI * 3 * hz * t)
    );
  }
  return out;
}

export interface ToyNote {
  note: string;
  pitch: number;
  velocity: number;
  instrument: string;
  family: string;
  source: string;
}

export const TOY_NOTES: ToyNote[] = [
  {
    note: 'keyboard_acoustic_000-060-100',
    pitch: 60, velocity: 100,
    instrument: 'keyboard_acoustic_000', family: 'keyboard', source: 'acoustic',
  },
  {
    note: 'keyboard_acoustic_000-064-075',
    pitch: 64, velocity: 75,
    instrument: 'keyboard_acoustic_000', family: 'keyboard', source: 'acoustic',
  },
  {
    note: 'string_acoustic_012-060-100',
    pitch: 60, velocity: 100,
    instrument: 'string_acoustic_012', family: 'string', source: 'acoustic',
  },
];

export function writeToyCorpus(dir: string, notes: ToyNote[] = TOY_NOTES): string {
  const audioDir = path.join(dir, 'audio');
  fs.mkdirSync(audioDir, { recursive: true });
  const meta: Record<string, object> = {};
  for (const n of notes) {
    meta[n.note] = {
      pitch: n.pitch,
      velocity: n.velocity,
      instrument_str: n.instrument,
      instrument_family_str: n.family,
      instrument_source_str: n.source,
    };
    const clamped = Math.min(108, Math.max(21, n.pitch)); // keep tones audible for bad-pitch rows
    fs.writeFileSync(
      path.join(audioDir, `${n.note}.wav`),
      encodeWavPcm16(tone(clamped, n.velocity), TEST_RATE),
    );
  }
  fs.writeFileSync(path.join(dir, 'examples.json'), JSON.stringify(meta, null, 2) + '\n');
  return dir;
}
