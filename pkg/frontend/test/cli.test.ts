import fs from 'fs';
import path from 'path';

import { afterEach, describe, expect, it, vi } from 'vitest';

import { main } from '../src/cli.js';
import { TEST_DZ, tmpdir, writeToyCorpus } from './helpers.js';

afterEach(() => {
  vi.restoreAllMocks();
});

function quiet() {
  const out = vi.spyOn(console, 'log').mockImplementation(() => {});
  const err = vi.spyOn(console, 'error').mockImplementation(() => {});
  return { out, err };
}

describe('cli main', () => {
  it('extract-audio writes the manifest pair', async () => {
    const { out } = quiet();
    const corpus = writeToyCorpus(tmpdir('corpus'));
    const manifest = path.join(tmpdir('out'), 'toy.json');
    const code = await main([
      'extract-audio', '--corpus', corpus, '--out', manifest,
      '--encoder', 'joint', '--dz', String(TEST_DZ),
    ]);
    expect(code).toBe(0);
    expect(fs.existsSync(manifest)).toBe(true);
    expect(fs.statSync(manifest.replace(/\.json$/, '.f32')).size).toBe(3 * TEST_DZ * 4);
    expect(out.mock.calls[0][0]).toMatch(/3 samples.*builtin-joint/);
  });

  it('extract-text reads prompts from args and files, skipping blank lines', async () => {
    quiet();
    const outDir = tmpdir('prompts');
    const promptFile = path.join(tmpdir('prompts'), 'list.txt');
    fs.writeFileSync(promptFile, 'glassy bells\n\nsoft strings\n');
    const code = await main([
      'extract-text', '--out-dir', outDir, '--dz', String(TEST_DZ),
      '--prompts', promptFile, 'warm electric piano',
    ]);
    expect(code).toBe(0);
    expect(fs.readdirSync(outDir).filter((f) => f.endsWith('.json')).sort())
      .toEqual(['prompt-001.json', 'prompt-002.json', 'prompt-003.json']);
  });

  it('reports usage failures with exit 1', async () => {
    const { err } = quiet();
    expect(await main(['extract-audio', '--out', 'x.json'])).toBe(1);
    expect(err.mock.calls[0][0]).toMatch(/--corpus is required/);
    expect(await main(['extract-audio', '--corpus', 'a', '--out', 'b', '--frobnicate'])).toBe(1);
    expect(await main(['no-such-command'])).toBe(1);
    expect(await main([])).toBe(1);
  });

  it('reports corpus failures with exit 1', async () => {
    const { err } = quiet();
    const code = await main([
      'extract-audio', '--corpus', tmpdir('empty'), '--out',
      path.join(tmpdir('out'), 'toy.json'),
    ]);
    expect(code).toBe(1);
    expect(err.mock.calls[0][0]).toMatch(/cannot read corpus metadata/);
  });

  it('refuses shape overrides next to --external', async () => {
    const { err } = quiet();
    const code = await main([
      'extract-audio', '--corpus', 'a', '--out', 'b.json',
      '--external', 'lock.json', 'clap', '--dz', '8',
    ]);
    expect(code).toBe(1);
    expect(err.mock.calls[0][0]).toMatch(/lockfile/);
  });
});
