/*
 * Adapter seam for pretrained encoders.  The evaluation toolkit never
 * links against a model; this side runs one as an external command and
 * pins its weight artifact by SHA-256 in a lockfile, so a swapped or
 * corrupted model fails closed before anything is encoded.
 *
 * Command contract: argv from the lockfile plus the artifact path; raw
 * f32le mono samples on stdin; the sample rate in the RATE environment
 * variable; stdout a JSON array of frames, each an array of dz floats.
 */

import crypto from 'crypto';
import fs from 'fs';
import path from 'path';
import { execFileSync } from 'child_process';

import { AudioEncoder, l2Normalize } from './encoder.js';

export interface ExternalEncoderSpec {
  name: string;
  dz: number;
  framesPerSample: number;
  command: string[];
  artifact: string; // relative to the lockfile
  sha256: string;
}

export function sha256File(filePath: string): string {
  const hash = crypto.createHash('sha256');
  hash.update(fs.readFileSync(filePath));
  return hash.digest('hex');
}

function asSpec(name: string, raw: unknown, lockPath: string): ExternalEncoderSpec {
  const obj = raw as Record<string, unknown>;
  const dz = obj.dz;
  const frames = obj.frames_per_sample;
  const command = obj.command;
  const artifact = obj.artifact;
  const sha256 = obj.sha256;
  const bad = (what: string) => new Error(`${lockPath}: encoder ${name}: ${what}`);
  if (!Number.isInteger(dz) || (dz as number) < 1) throw bad('dz must be a positive integer');
  if (!Number.isInteger(frames) || (frames as number) < 1) {
    throw bad('frames_per_sample must be a positive integer');
  }
  if (!Array.isArray(command) || command.length === 0 || command.some((c) => typeof c !== 'string')) {
    throw bad('command must be a non-empty string array');
  }
  if (typeof artifact !== 'string' || artifact === '') throw bad('artifact path missing');
  if (typeof sha256 !== 'string' || !/^[0-9a-f]{64}$/.test(sha256)) {
    throw bad('sha256 must be 64 hex characters');
  }
  return {
    name,
    dz: dz as number,
    framesPerSample: frames as number,
    command: command as string[],
    artifact,
    sha256,
  };
}

export function loadLockfile(lockPath: string): Map<string, ExternalEncoderSpec> {
  let doc: unknown;
  try {
    doc = JSON.parse(fs.readFileSync(lockPath, 'utf-8'));
  } catch (err) {
    throw new Error(`${lockPath}: cannot read lockfile: ${(err as Error).message}`);
  }
  const root = doc as Record<string, unknown>;
  if (root === null || typeof root !== 'object' || root.version !== 1) {
    throw new Error(`${lockPath}: unsupported lockfile (want version 1)`);
  }
  const encoders = root.encoders;
  if (encoders === null || typeof encoders !== 'object') {
    throw new Error(`${lockPath}: encoders must be an object`);
  }
  const out = new Map<string, ExternalEncoderSpec>();
  for (const [name, raw] of Object.entries(encoders as Record<string, unknown>)) {
    out.set(name, asSpec(name, raw, lockPath));
  }
  return out;
}

export function verifyArtifact(spec: ExternalEncoderSpec, lockDir: string): string {
  const artifactPath = path.resolve(lockDir, spec.artifact);
  let digest: string;
  try {
    digest = sha256File(artifactPath);
  } catch (err) {
    throw new Error(
      `encoder ${spec.name}: artifact ${spec.artifact} unreadable: ${(err as Error).message}`
    );
  }
  if (digest !== spec.sha256) {
    throw new Error(
      `encoder ${spec.name}: artifact ${spec.artifact} checksum mismatch ` +
      `(have ${digest}, pinned ${spec.sha256})`
    );
  }
  return artifactPath;
}

class ExternalAudioEncoder implements AudioEncoder {
  readonly name: string;
  readonly dz: number;
  readonly framesPerSample: number;

  constructor(private spec: ExternalEncoderSpec, private artifactPath: string) {
    this.name = `external:${spec.name}`;
    this.dz = spec.dz;
    this.framesPerSample = spec.framesPerSample;
  }

  encode(samples: Float32Array, sampleRate: number): Float32Array[] {
    const input = Buffer.from(samples.buffer, samples.byteOffset, samples.byteLength);
    const [cmd, ...args] = this.spec.command;
    let stdout: string;
    try {
      stdout = execFileSync(cmd, [...args, this.artifactPath], {
        input,
        env: { ...process.env, RATE: String(sampleRate) },
        encoding: 'utf-8',
        maxBuffer: 256 * 1024 * 1024,
      });
    } catch (err) {
      throw new Error(`encoder ${this.spec.name} failed: ${(err as Error).message}`);
    }
    let frames: unknown;
    try {
      frames = JSON.parse(stdout);
    } catch {
      throw new Error(`encoder ${this.spec.name} printed invalid JSON`);
    }
    if (!Array.isArray(frames) || frames.length !== this.framesPerSample) {
      throw new Error(
        `encoder ${this.spec.name} returned ${Array.isArray(frames) ? frames.length : '?'} ` +
        `frames, declared ${this.framesPerSample}`
      );
    }
    return frames.map((f) => {
      if (!Array.isArray(f) || f.length !== this.dz || f.some((x) => typeof x !== 'number' || !Number.isFinite(x))) {
        throw new Error(`encoder ${this.spec.name} returned a malformed ${this.dz}-float frame`);
      }
      return l2Normalize(Float32Array.from(f as number[]));
    });
  }
}

/* Look up an encoder in the lockfile, verify its artifact, return it ready to run. */
export function externalAudioEncoder(lockPath: string, name: string): AudioEncoder {
  const specs = loadLockfile(lockPath);
  const spec = specs.get(name);
  if (spec === undefined) {
    const known = [...specs.keys()].sort().join(', ') || '(none)';
    throw new Error(`${lockPath}: no encoder named ${JSON.stringify(name)}; lockfile has: ${known}`);
  }
  const artifactPath = verifyArtifact(spec, path.dirname(path.resolve(lockPath)));
  return new ExternalAudioEncoder(spec, artifactPath);
}
