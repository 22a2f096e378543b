/*
 * Extraction jobs.
 *
 * extractAudio walks an NSynth-style corpus, decodes and encodes files
 * in parallel batches, then hands every record to the single store
 * writer.  Records are ordered by content, not completion, so batch
 * timing never changes the output.
 *
 * extractText turns each prompt into its own single-record store file
 * (one instrument whose id is the prompt text, one unit-norm vector
 * under a fixed placeholder key), which is the shape the evaluation
 * toolkit reads prompts from.
 */

import path from 'path';

import { AudioEncoder, PromptEncoder } from './encoder.js';
import { StoreRecord, writeStore } from './format.js';
import { NoteRow, readCorpus } from './nsynth.js';
import { ResamplePolicy, applyResample } from './resample.js';
import { readWavMono } from './wav.js';

// placeholder key for prompt files; readers ignore it
const PROMPT_PITCH = 60;
const PROMPT_VELOCITY = 100;

const DEFAULT_BATCH = 8;

export interface ExtractionJob {
  corpusDir: string;
  encoder: AudioEncoder;
  outManifest: string;
  resample: ResamplePolicy;
  batchSize?: number;
}

export interface ExtractionResult {
  manifestPath: string;
  dataPath: string;
  samples: number;
}

function encodeRow(row: NoteRow, encoder: AudioEncoder, policy: ResamplePolicy): StoreRecord {
  const decoded = readWavMono(row.file);
  const fed = applyResample(decoded.samples, decoded.sampleRate, policy);
  return {
    instrumentId: row.instrument,
    family: row.family,
    source: row.source,
    pitch: row.pitch,
    velocity: row.velocity,
    frames: encoder.encode(fed.samples, fed.sampleRate),
  };
}

export async function extractAudio(job: ExtractionJob): Promise<ExtractionResult> {
  const rows = readCorpus(job.corpusDir);
  const batch = Math.max(1, job.batchSize ?? DEFAULT_BATCH);
  const records: StoreRecord[] = [];
  for (let start = 0; start < rows.length; start += batch) {
    const chunk = rows.slice(start, start + batch);
    const encoded = await Promise.all(
      chunk.map((row) => Promise.resolve().then(() => encodeRow(row, job.encoder, job.resample)))
    );
    records.push(...encoded);
  }
  return writeStore(records, job.encoder.dz, job.encoder.framesPerSample, job.outManifest);
}

/* One store file per prompt, named by position: prompt-001.json, ... */
export function extractText(
  prompts: string[],
  outDir: string,
  encoder: PromptEncoder,
): ExtractionResult[] {
  if (prompts.length === 0) throw new Error('no prompts given');
  const width = Math.max(3, String(prompts.length).length);
  const out: ExtractionResult[] = [];
  prompts.forEach((prompt, i) => {
    const vector = encoder.encode(prompt); // rejects empty prompts
    const stem = `prompt-${String(i + 1).padStart(width, '0')}`;
    const record: StoreRecord = {
      instrumentId: prompt.trim(),
      pitch: PROMPT_PITCH,
      velocity: PROMPT_VELOCITY,
      frames: [vector],
    };
    out.push(writeStore([record], encoder.dz, 1, path.join(outDir, `${stem}.json`)));
  });
  return out;
}
