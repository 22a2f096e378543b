/*
 * Command line front end.
 *
 *   extract-audio --corpus DIR --out MANIFEST [--encoder joint|framewise]
 *                 [--dz N] [--resample none|linear:HZ]
 *                 [--external LOCKFILE NAME]
 *   extract-text  --out-dir DIR [--dz N] [--prompts FILE] [PROMPT ...]
 *
 * Exit codes: 0 success, 1 anything wrong (usage, corpus, audio, encoder).
 */

import fs from 'fs';
import { pathToFileURL } from 'url';

import { AudioEncoder, DEFAULT_DZ, builtinAudioEncoder, builtinPromptEncoder } from './encoder.js';
import { externalAudioEncoder } from './external.js';
import { extractAudio, extractText } from './extract.js';
import { parseResamplePolicy } from './resample.js';

interface Flags {
  opts: Map<string, string[]>;
  positional: string[];
}

/* --name value flags; `spec` maps flag -> arity (0 or 1). */
function parseFlags(argv: string[], spec: Record<string, number>): Flags {
  const opts = new Map<string, string[]>();
  const positional: string[] = [];
  let i = 0;
  while (i < argv.length) {
    const arg = argv[i];
    if (arg.startsWith('--')) {
      const name = arg.slice(2);
      const arity = spec[name];
      if (arity === undefined) throw new Error(`unknown flag --${name}`);
      const vals: string[] = [];
      for (let k = 0; k < arity; k++) {
        i += 1;
        if (i >= argv.length) throw new Error(`--${name} needs ${arity} value(s)`);
        vals.push(argv[i]);
      }
      opts.set(name, vals);
      i += 1;
    } else {
      positional.push(arg);
      i += 1;
    }
  }
  return { opts, positional };
}

function requireOpt(flags: Flags, name: string): string[] {
  const vals = flags.opts.get(name);
  if (vals === undefined) throw new Error(`--${name} is required`);
  return vals;
}

function parseDz(flags: Flags): number {
  const raw = flags.opts.get('dz')?.[0];
  if (raw === undefined) return DEFAULT_DZ;
  const dz = Number(raw);
  if (!Number.isInteger(dz) || dz < 1) throw new Error(`dz must be a positive integer, got ${raw}`);
  return dz;
}

async function cmdExtractAudio(argv: string[]): Promise<void> {
  const flags = parseFlags(argv, {
    corpus: 1, out: 1, encoder: 1, dz: 1, resample: 1, external: 2, batch: 1,
  });
  if (flags.positional.length > 0) {
    throw new Error(`unexpected argument ${JSON.stringify(flags.positional[0])}`);
  }
  const corpusDir = requireOpt(flags, 'corpus')[0];
  const outManifest = requireOpt(flags, 'out')[0];

  let encoder: AudioEncoder;
  const external = flags.opts.get('external');
  if (external !== undefined) {
    if (flags.opts.has('encoder') || flags.opts.has('dz')) {
      throw new Error('--external takes its shape from the lockfile; drop --encoder/--dz');
    }
    encoder = externalAudioEncoder(external[0], external[1]);
  } else {
    encoder = builtinAudioEncoder(flags.opts.get('encoder')?.[0] ?? 'joint', parseDz(flags));
  }

  const batchRaw = flags.opts.get('batch')?.[0];
  const batchSize = batchRaw === undefined ? undefined : Number(batchRaw);
  if (batchSize !== undefined && (!Number.isInteger(batchSize) || batchSize < 1)) {
    throw new Error(`batch must be a positive integer, got ${batchRaw}`);
  }

  const result = await extractAudio({
    corpusDir,
    encoder,
    outManifest,
    resample: parseResamplePolicy(flags.opts.get('resample')?.[0] ?? 'none'),
    batchSize,
  });
  console.log(
    `wrote ${result.manifestPath} (${result.samples} samples, ` +
    `encoder ${encoder.name}, dz ${encoder.dz}, frames ${encoder.framesPerSample})`
  );
}

function cmdExtractText(argv: string[]): void {
  const flags = parseFlags(argv, { 'out-dir': 1, dz: 1, prompts: 1 });
  const outDir = requireOpt(flags, 'out-dir')[0];
  const prompts = [...flags.positional];
  const promptFile = flags.opts.get('prompts')?.[0];
  if (promptFile !== undefined) {
    const text = fs.readFileSync(promptFile, 'utf-8');
    // blank lines in a prompt file are separators, not prompts
    prompts.push(...text.split('\n').map((l) => l.trim()).filter((l) => l !== ''));
  }
  const results = extractText(prompts, outDir, builtinPromptEncoder(parseDz(flags)));
  for (const r of results) console.log(`wrote ${r.manifestPath}`);
}

const USAGE = `usage:
  extract-audio --corpus DIR --out MANIFEST [--encoder joint|framewise] [--dz N]
                [--resample none|linear:HZ] [--external LOCKFILE NAME] [--batch N]
  extract-text  --out-dir DIR [--dz N] [--prompts FILE] [PROMPT ...]`;

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    if (command === 'extract-audio') {
      await cmdExtractAudio(rest);
    } else if (command === 'extract-text') {
      cmdExtractText(rest);
    } else if (command === undefined || command === '--help' || command === 'help') {
      console.log(USAGE);
      return command === undefined ? 1 : 0;
    } else {
      throw new Error(`unknown command ${JSON.stringify(command)}\n${USAGE}`);
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(entry).href) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
