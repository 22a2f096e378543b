/*
 * Public surface of the extractor: corpus reading, encoders, the store
 * writer, and the two extraction jobs.
 */

export { GRID_CELLS, PITCH_MAX, PITCH_MIN, VELOCITIES, gridIndex } from './grid.js';
export { decodeWav, encodeWavPcm16, readWavMono } from './wav.js';
export { applyResample, linearResample, parseResamplePolicy } from './resample.js';
export {
  CLIP_SECONDS,
  DEFAULT_DZ,
  FRAMEWISE_FRAMES,
  builtinAudioEncoder,
  builtinPromptEncoder,
  l2Normalize,
  prepareClip,
  spectralVector,
} from './encoder.js';
export { externalAudioEncoder, loadLockfile, sha256File, verifyArtifact } from './external.js';
export { readCorpus } from './nsynth.js';
export { MANIFEST_VERSION, UNIT_NORM_TOL, writeStore } from './format.js';
export { extractAudio, extractText } from './extract.js';
export { main } from './cli.js';

export type { WavData } from './wav.js';
export type { ResamplePolicy } from './resample.js';
export type { AudioEncoder, PromptEncoder } from './encoder.js';
export type { ExternalEncoderSpec } from './external.js';
export type { NoteRow } from './nsynth.js';
export type { StoreRecord } from './format.js';
export type { ExtractionJob, ExtractionResult } from './extract.js';
