/*
 * Corpus metadata reader for NSynth-style layouts: a directory with an
 * examples.json map of note id -> metadata row, audio under
 * audio/<note>.wav.  Rows are validated against the grid rule and
 * against the files actually present before any audio is decoded, so a
 * bad corpus fails fast with the offending note named.
 */

import fs from 'fs';
import path from 'path';

import { gridIndex } from './grid.js';

export interface NoteRow {
  note: string;
  pitch: number;
  velocity: number;
  instrument: string;
  family?: string;
  source?: string;
  file: string;
}

function rowError(note: string, what: string): Error {
  return new Error(`metadata row ${JSON.stringify(note)}: ${what}`);
}

function parseRow(note: string, raw: unknown, audioDir: string): NoteRow {
  if (raw === null || typeof raw !== 'object') {
    throw rowError(note, 'must be an object');
  }
  const obj = raw as Record<string, unknown>;
  const pitch = obj.pitch;
  const velocity = obj.velocity;
  if (!Number.isInteger(pitch) || !Number.isInteger(velocity)) {
    throw rowError(note, 'pitch and velocity must be integers');
  }
  try {
    gridIndex(pitch as number, velocity as number);
  } catch (err) {
    throw rowError(note, (err as Error).message);
  }
  const instrument = obj.instrument_str;
  if (typeof instrument !== 'string' || instrument === '') {
    throw rowError(note, 'instrument_str missing');
  }
  const family = obj.instrument_family_str;
  const source = obj.instrument_source_str;
  if (family !== undefined && typeof family !== 'string') {
    throw rowError(note, 'instrument_family_str must be a string');
  }
  if (source !== undefined && typeof source !== 'string') {
    throw rowError(note, 'instrument_source_str must be a string');
  }
  const file = path.join(audioDir, `${note}.wav`);
  if (!fs.existsSync(file)) {
    throw rowError(note, `audio file not found: ${file}`);
  }
  return {
    note,
    pitch: pitch as number,
    velocity: velocity as number,
    instrument,
    family: family as string | undefined,
    source: source as string | undefined,
    file,
  };
}

export function readCorpus(corpusDir: string): NoteRow[] {
  const metaPath = path.join(corpusDir, 'examples.json');
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(metaPath, 'utf-8'));
  } catch (err) {
    throw new Error(`${metaPath}: cannot read corpus metadata: ${(err as Error).message}`);
  }
  if (doc === null || typeof doc !== 'object' || Array.isArray(doc)) {
    throw new Error(`${metaPath}: corpus metadata must map note ids to rows`);
  }
  const entries = Object.entries(doc as Record<string, unknown>);
  if (entries.length === 0) {
    throw new Error(`${metaPath}: corpus metadata is empty`);
  }
  entries.sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  const audioDir = path.join(corpusDir, 'audio');
  return entries.map(([note, raw]) => parseRow(note, raw, audioDir));
}
