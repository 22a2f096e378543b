/*
 * Minimal RIFF/WAVE reader for corpus audio.  Supports the two layouts
 * single-shot sample sets actually ship in: 16-bit PCM and 32-bit IEEE
 * float, any channel count (averaged to mono).  Everything else is
 * rejected with a clear message rather than decoded approximately.
 */

import fs from 'fs';

export interface WavData {
  samples: Float32Array;
  sampleRate: number;
}

function chunkId(buf: Buffer, off: number): string {
  return buf.toString('ascii', off, off + 4);
}

export function decodeWav(buf: Buffer, label: string): WavData {
  if (buf.length < 12 || chunkId(buf, 0) !== 'RIFF' || chunkId(buf, 8) !== 'WAVE') {
    throw new Error(`${label}: not a RIFF/WAVE file`);
  }

  let fmt: { format: number; channels: number; sampleRate: number; bits: number } | null = null;
  let dataOff = -1;
  let dataLen = -1;

  let off = 12;
  while (off + 8 <= buf.length) {
    const id = chunkId(buf, off);
    const size = buf.readUInt32LE(off + 4);
    const body = off + 8;
    if (body + size > buf.length) {
      throw new Error(`${label}: truncated ${id.trim()} chunk`);
    }
    if (id === 'fmt ') {
      if (size < 16) throw new Error(`${label}: fmt chunk too short`);
      fmt = {
        format: buf.readUInt16LE(body),
        channels: buf.readUInt16LE(body + 2),
        sampleRate: buf.readUInt32LE(body + 4),
        bits: buf.readUInt16LE(body + 14),
      };
    } else if (id === 'data') {
      dataOff = body;
      dataLen = size;
    }
    off = body + size + (size & 1); // chunks are word-aligned
  }

  if (fmt === null) throw new Error(`${label}: missing fmt chunk`);
  if (dataOff < 0) throw new Error(`${label}: missing data chunk`);
  if (fmt.channels < 1) throw new Error(`${label}: zero channel count`);
  if (fmt.sampleRate < 1) throw new Error(`${label}: zero sample rate`);

  const pcm16 = fmt.format === 1 && fmt.bits === 16;
  const float32 = fmt.format === 3 && fmt.bits === 32;
  if (!pcm16 && !float32) {
    throw new Error(
      `${label}: unsupported encoding (format ${fmt.format}, ${fmt.bits}-bit); ` +
      'only 16-bit PCM and 32-bit float are read'
    );
  }

  const bytesPer = fmt.bits / 8;
  const frameBytes = bytesPer * fmt.channels;
  const frames = Math.floor(dataLen / frameBytes);
  const out = new Float32Array(frames);
  for (let i = 0; i < frames; i++) {
    let acc = 0;
    const base = dataOff + i * frameBytes;
    for (let c = 0; c < fmt.channels; c++) {
      acc += pcm16
        ? buf.readInt16LE(base + c * bytesPer) / 32768
        : buf.readFloatLE(base + c * bytesPer);
    }
    out[i] = acc / fmt.channels;
  }
  return { samples: out, sampleRate: fmt.sampleRate };
}

export function readWavMono(filePath: string): WavData {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(filePath);
  } catch (err) {
    throw new Error(`${filePath}: cannot read audio: ${(err as Error).message}`);
  }
  return decodeWav(buf, filePath);
}

/* Test and fixture helper: encode mono float samples as a 16-bit PCM WAV. */
export function encodeWavPcm16(samples: Float32Array, sampleRate: number): Buffer {
  const dataLen = samples.length * 2;
  const buf = Buffer.alloc(44 + dataLen);
  buf.write('RIFF', 0, 'ascii');
  buf.writeUInt32LE(36 + dataLen, 4);
  buf.write('WAVE', 8, 'ascii');
  buf.write('fmt ', 12, 'ascii');
  buf.writeUInt32LE(16, 16);
  buf.writeUInt16LE(1, 20); // PCM
  buf.writeUInt16LE(1, 22); // mono
  buf.writeUInt32LE(sampleRate, 24);
  buf.writeUInt32LE(sampleRate * 2, 28);
  buf.writeUInt16LE(2, 32);
  buf.writeUInt16LE(16, 34);
  buf.write('data', 36, 'ascii');
  buf.writeUInt32LE(dataLen, 40);
  for (let i = 0; i < samples.length; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    buf.writeInt16LE(Math.round(v * 32767), 44 + i * 2);
  }
  return buf;
}
