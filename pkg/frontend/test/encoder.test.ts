import { describe, expect, it } from 'vitest';

import {
  CLIP_SECONDS,
  builtinAudioEncoder,
  builtinPromptEncoder,
  prepareClip,
} from '../src/encoder.js';
import { TEST_DZ, TEST_RATE, tone } from './helpers.js';

function norm(v: Float32Array): number {
  let acc = 0;
  for (const x of v) acc += x * x;
  return Math.sqrt(acc);
}

function bytesOf(v: Float32Array): Buffer {
  return Buffer.from(v.buffer.slice(0), v.byteOffset, v.byteLength);
}

function cosine(a: Float32Array, b: Float32Array): number {
  let acc = 0;
  for (let i = 0; i < a.length; i++) acc += a[i] * b[i];
  return acc;
}

describe('prepareClip', () => {
  it('zero-pads short audio at the tail', () => {
    const clip = prepareClip(tone(60, 100, 0.5), TEST_RATE);
    expect(clip.length).toBe(CLIP_SECONDS * TEST_RATE);
    expect(clip[10]).not.toBe(0);
    expect(clip[clip.length - 1]).toBe(0);
  });

  it('truncates long audio', () => {
    const clip = prepareClip(tone(60, 100, 6), TEST_RATE);
    expect(clip.length).toBe(CLIP_SECONDS * TEST_RATE);
  });
});

describe('builtin audio encoders', () => {
  const joint = builtinAudioEncoder('joint', TEST_DZ);
  const framewise = builtinAudioEncoder('framewise', TEST_DZ);

  it('declares the frame count the store will see', () => {
    expect(joint.framesPerSample).toBe(1);
    expect(framewise.framesPerSample).toBe(4);
  });

  it('emits unit-norm vectors, byte-stable across calls', () => {
    const samples = tone(60, 100);
    const a = joint.encode(samples, TEST_RATE);
    const b = joint.encode(samples.slice(), TEST_RATE);
    expect(a.length).toBe(1);
    expect(Math.abs(norm(a[0]) - 1)).toBeLessThan(1e-6);
    expect(bytesOf(a[0]).equals(bytesOf(b[0]))).toBe(true);
  });

  it('separates different notes', () => {
    const lo = joint.encode(tone(36, 100), TEST_RATE)[0];
    const hi = joint.encode(tone(84, 100), TEST_RATE)[0];
    expect(cosine(lo, hi)).toBeLessThan(0.99);
  });

  it('framewise splits the clip into four encoded segments', () => {
    const frames = framewise.encode(tone(60, 100, 1.5), TEST_RATE);
    expect(frames.length).toBe(4);
    for (const f of frames) expect(Math.abs(norm(f) - 1)).toBeLessThan(1e-6);
    // the tail segments are pure padding and collapse to the silence direction
    expect(bytesOf(frames[2]).equals(bytesOf(frames[3]))).toBe(true);
    expect(bytesOf(frames[0]).equals(bytesOf(frames[2]))).toBe(false);
  });

  it('maps silence to a fixed direction instead of a zero record', () => {
    const frames = joint.encode(new Float32Array(100), TEST_RATE);
    const want = 1 / Math.sqrt(TEST_DZ);
    for (const x of frames[0]) expect(x).toBeCloseTo(want, 6);
  });

  it('rejects unknown choices and bad dz', () => {
    expect(() => builtinAudioEncoder('huge')).toThrow(/unknown encoder choice/);
    expect(() => builtinAudioEncoder('joint', 0)).toThrow(/dz must be a positive integer/);
  });
});

describe('builtin prompt encoder', () => {
  const enc = builtinPromptEncoder(TEST_DZ);

  it('is deterministic and unit-norm', () => {
    const a = enc.encode('warm electric piano');
    const b = enc.encode('warm electric piano');
    expect(Math.abs(norm(a) - 1)).toBeLessThan(1e-6);
    expect(bytesOf(a).equals(bytesOf(b))).toBe(true);
  });

  it('separates different prompts', () => {
    const a = enc.encode('warm electric piano');
    const b = enc.encode('harsh metallic lead');
    expect(bytesOf(a).equals(bytesOf(b))).toBe(false);
  });

  it('rejects empty prompts', () => {
    expect(() => enc.encode('')).toThrow(/empty prompt/);
    expect(() => enc.encode('   ')).toThrow(/empty prompt/);
  });
});
