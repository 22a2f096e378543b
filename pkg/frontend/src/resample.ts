/*
 * Resample policy applied between decoding and encoding.  The exact
 * chain feeding a pretrained encoder is not pinned by the store format,
 * so it stays a documented option on the job: 'none' passes audio
 * through at the corpus rate, 'linear:<hz>' interpolates linearly to a
 * target rate (cheap, deterministic, good enough for fixtures; swap in
 * a real resampler via the external encoder's own front end if band
 * limiting matters).
 */

export type ResamplePolicy = { kind: 'none' } | { kind: 'linear'; rate: number };

export function parseResamplePolicy(text: string): ResamplePolicy {
  if (text === 'none') return { kind: 'none' };
  const m = /^linear:(\d+)$/.exec(text);
  if (m) {
    const rate = parseInt(m[1], 10);
    if (rate >= 1) return { kind: 'linear', rate };
  }
  throw new Error(`bad resample policy ${JSON.stringify(text)}; use none or linear:<hz>`);
}

export function linearResample(samples: Float32Array, from: number, to: number): Float32Array {
  if (from === to) return samples;
  const n = Math.max(1, Math.round(samples.length * to / from));
  const out = new Float32Array(n);
  const step = from / to;
  for (let i = 0; i < n; i++) {
    const t = i * step;
    const i0 = Math.floor(t);
    if (i0 >= samples.length - 1) {
      out[i] = samples[samples.length - 1] ?? 0;
    } else {
      const frac = t - i0;
      out[i] = samples[i0] * (1 - frac) + samples[i0 + 1] * frac;
    }
  }
  return out;
}

export function applyResample(
  samples: Float32Array,
  sampleRate: number,
  policy: ResamplePolicy,
): { samples: Float32Array; sampleRate: number } {
  if (policy.kind === 'none' || policy.rate === sampleRate) {
    return { samples, sampleRate };
  }
  return { samples: linearResample(samples, sampleRate, policy.rate), sampleRate: policy.rate };
}
