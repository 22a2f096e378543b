/*
 * Deterministic builtin encoders.  These are signal statistics, not
 * pretrained models: they let extraction run end to end, byte-stable,
 * in an environment with no model weights.  Real joint or framewise
 * encoders plug in through the external adapter (external.ts) and are
 * pinned there by checksum.
 *
 * Clip policy shared by both audio builtins: audio is zero-padded at
 * the tail (single shots decay naturally) or truncated to exactly
 * CLIP_SECONDS, then either encoded whole (joint, one record) or as
 * four one-second segments (framewise, four records).
 */

export const CLIP_SECONDS = 4;
export const FRAMEWISE_FRAMES = 4;
export const DEFAULT_DZ = 64;

// log-spaced analysis band, in Hz; bins above Nyquist read as silence
const BAND_LOW_HZ = 55;
const BAND_OCTAVES = 7;

export interface AudioEncoder {
  readonly name: string;
  readonly dz: number;
  readonly framesPerSample: number;
  encode(samples: Float32Array, sampleRate: number): Float32Array[];
}

export interface PromptEncoder {
  readonly name: string;
  readonly dz: number;
  encode(text: string): Float32Array;
}

export function l2Normalize(vec: Float32Array): Float32Array {
  let acc = 0;
  for (let i = 0; i < vec.length; i++) acc += vec[i] * vec[i];
  const norm = Math.sqrt(acc);
  if (norm === 0) {
    // silent input maps to a fixed direction instead of a zero record
    const out = new Float32Array(vec.length);
    out.fill(1 / Math.sqrt(vec.length));
    return out;
  }
  const out = new Float32Array(vec.length);
  for (let i = 0; i < vec.length; i++) out[i] = vec[i] / norm;
  return out;
}

export function prepareClip(samples: Float32Array, sampleRate: number): Float32Array {
  const want = CLIP_SECONDS * sampleRate;
  if (samples.length === want) return samples;
  const out = new Float32Array(want);
  out.set(samples.subarray(0, Math.min(samples.length, want)));
  return out;
}

/* Hann-windowed Goertzel magnitude at one normalized frequency. */
function toneMagnitude(slice: Float32Array, freq: number): number {
  const n = slice.length;
  if (n < 2) return 0;
  const coeff = 2 * Math.cos(2 * Math.PI * freq);
  const wStep = (2 * Math.PI) / (n - 1);
  let s1 = 0;
  let s2 = 0;
  for (let i = 0; i < n; i++) {
    const w = 0.5 - 0.5 * Math.cos(wStep * i);
    const s0 = slice[i] * w + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  return Math.sqrt(Math.max(0, s1 * s1 + s2 * s2 - coeff * s1 * s2)) / n;
}

/* Log band energies across dz log-spaced bins, unit-normalized. */
export function spectralVector(slice: Float32Array, dz: number, sampleRate: number): Float32Array {
  const out = new Float32Array(dz);
  const span = dz > 1 ? dz - 1 : 1;
  for (let k = 0; k < dz; k++) {
    const hz = BAND_LOW_HZ * Math.pow(2, (BAND_OCTAVES * k) / span);
    if (hz * 2 >= sampleRate) continue; // above Nyquist
    out[k] = Math.log1p(1e4 * toneMagnitude(slice, hz / sampleRate));
  }
  return l2Normalize(out);
}

class BuiltinJointEncoder implements AudioEncoder {
  readonly name = 'builtin-joint';
  readonly framesPerSample = 1;
  constructor(readonly dz: number) {}

  encode(samples: Float32Array, sampleRate: number): Float32Array[] {
    return [spectralVector(prepareClip(samples, sampleRate), this.dz, sampleRate)];
  }
}

class BuiltinFramewiseEncoder implements AudioEncoder {
  readonly name = 'builtin-framewise';
  readonly framesPerSample = FRAMEWISE_FRAMES;
  constructor(readonly dz: number) {}

  encode(samples: Float32Array, sampleRate: number): Float32Array[] {
    const clip = prepareClip(samples, sampleRate);
    const seg = Math.floor(clip.length / FRAMEWISE_FRAMES);
    const frames: Float32Array[] = [];
    for (let f = 0; f < FRAMEWISE_FRAMES; f++) {
      frames.push(spectralVector(clip.subarray(f * seg, (f + 1) * seg), this.dz, sampleRate));
    }
    return frames;
  }
}

/* FNV-1a over the UTF-8 bytes of a string, 32-bit. */
function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  const bytes = Buffer.from(text, 'utf-8');
  for (let i = 0; i < bytes.length; i++) {
    h ^= bytes[i];
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

class BuiltinPromptEncoder implements PromptEncoder {
  readonly name = 'builtin-text';
  constructor(readonly dz: number) {}

  encode(text: string): Float32Array {
    const trimmed = text.trim();
    if (trimmed === '') {
      throw new Error('empty prompt');
    }
    const bins = new Float32Array(this.dz);
    const padded = `${trimmed.toLowerCase()}`;
    for (let i = 0; i + 3 <= padded.length; i++) {
      bins[fnv1a(padded.slice(i, i + 3)) % this.dz] += 1;
    }
    for (let k = 0; k < this.dz; k++) bins[k] = Math.sqrt(bins[k]);
    return l2Normalize(bins);
  }
}

export function builtinAudioEncoder(choice: string, dz: number = DEFAULT_DZ): AudioEncoder {
  if (dz < 1 || !Number.isInteger(dz)) throw new Error(`dz must be a positive integer, got ${dz}`);
  if (choice === 'joint') return new BuiltinJointEncoder(dz);
  if (choice === 'framewise') return new BuiltinFramewiseEncoder(dz);
  throw new Error(`unknown encoder choice ${JSON.stringify(choice)}; use joint or framewise`);
}

export function builtinPromptEncoder(dz: number = DEFAULT_DZ): PromptEncoder {
  if (dz < 1 || !Number.isInteger(dz)) throw new Error(`dz must be a positive integer, got ${dz}`);
  return new BuiltinPromptEncoder(dz);
}
