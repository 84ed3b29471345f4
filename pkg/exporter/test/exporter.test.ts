import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

import { run } from '../src/cli.js';
import { formatEmbeddingFile, readEntityList, writeExport } from '../src/format.js';
import { TrigramHashModel, resolveModel } from '../src/models.js';

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), 'exporter-'));
}

function writeEntities(dir: string, names: string[]): string {
  const path = join(dir, 'entities.txt');
  writeFileSync(path, names.join('\n') + '\n', 'utf8');
  return path;
}

async function exportOnce(dir: string, names: string[], out = 'emb.txt') {
  const entities = writeEntities(dir, names);
  const model = new TrigramHashModel(64);
  const vectors = await model.encode(names);
  const outPath = join(dir, out);
  const manifest = writeExport(outPath, names, vectors, model.id, 'mean');
  return { outPath, manifest };
}

describe('entity list reading', () => {
  it('keeps order and trims only the newline', () => {
    const dir = tempDir();
    const path = writeEntities(dir, ['b', 'a', 'name with space']);
    expect(readEntityList(path)).toEqual(['b', 'a', 'name with space']);
  });

  it('rejects an empty list', () => {
    const dir = tempDir();
    const path = join(dir, 'empty.txt');
    writeFileSync(path, '', 'utf8');
    expect(() => readEntityList(path)).toThrow(/empty entity list/);
  });

  it('rejects names with tabs', () => {
    const dir = tempDir();
    const path = join(dir, 'bad.txt');
    writeFileSync(path, 'a\tb\n', 'utf8');
    expect(() => readEntityList(path)).toThrow(/tab/);
  });
});

describe('hash model', () => {
  it('is deterministic and name-keyed', async () => {
    const model = new TrigramHashModel(32);
    const [a1, b] = await model.encode(['Angela Merkel', 'Barack Obama']);
    const [a2] = await model.encode(['Angela Merkel']);
    expect(a1).toEqual(a2);
    expect(a1).not.toEqual(b);
  });

  it('resolves by id with optional dimension', async () => {
    expect((await resolveModel('hash-trigram')).dim).toBe(256);
    expect((await resolveModel('hash-trigram-128')).dim).toBe(128);
  });

  it('reports unavailable pretrained models as errors', async () => {
    await expect(resolveModel('definitely/not-a-model')).rejects.toThrow(/unavailable/);
  });
});

describe('embedding file format', () => {
  it('writes the N d header and one named row per entity', async () => {
    const dir = tempDir();
    const { outPath } = await exportOnce(dir, ['x', 'y', 'z']);
    const lines = readFileSync(outPath, 'utf8').split('\n');
    expect(lines[0]).toBe('3 64');
    expect(lines[1].startsWith('x ')).toBe(true);
    expect(lines[4]).toBe('');
  });

  it('gives duplicate names identical rows', async () => {
    const dir = tempDir();
    const { outPath } = await exportOnce(dir, ['same name', 'same name']);
    const [, row1, row2] = readFileSync(outPath, 'utf8').split('\n');
    expect(row1.slice('same name'.length)).toBe(row2.slice('same name'.length));
  });

  it('rejects inconsistent rows', () => {
    expect(() => formatEmbeddingFile(['a'], [[]])).toThrow();
    expect(() => formatEmbeddingFile(['a', 'b'], [[1], [1, 2]])).toThrow();
    expect(() => formatEmbeddingFile(['a'], [[Number.NaN]])).toThrow();
  });
});

describe('acceptance: exporter round-trip', () => {
  const hundredNames = Array.from({ length: 100 }, (_, i) => `entity number ${i}`);

  it('keeps row order equal to input order on a 100-name list', async () => {
    const dir = tempDir();
    const { outPath } = await exportOnce(dir, hundredNames);
    const lines = readFileSync(outPath, 'utf8').trimEnd().split('\n');
    expect(lines).toHaveLength(101);
    hundredNames.forEach((name, i) => {
      const row = lines[i + 1];
      expect(row.split(' ').slice(0, 3).join(' ')).toBe(name);
    });
  });

  it('produces identical checksums across two runs', async () => {
    const dirA = tempDir();
    const dirB = tempDir();
    const a = await exportOnce(dirA, hundredNames);
    const b = await exportOnce(dirB, hundredNames);
    expect(a.manifest.sha256).toBe(b.manifest.sha256);
    expect(readFileSync(a.outPath, 'utf8')).toBe(readFileSync(b.outPath, 'utf8'));
  });

  it('emits a file the core toolkit reader parses', async () => {
    const dir = tempDir();
    const { outPath } = await exportOnce(dir, hundredNames);
    let stdout: string;
    try {
      stdout = execFileSync(
        'python3',
        [
          '-c',
          'import sys\n' +
            'from hhea.embeddings import read_embedding_file\n' +
            'names, emb = read_embedding_file(sys.argv[1])\n' +
            'print(len(names), emb.dim, names[0], names[-1])\n',
          outPath,
        ],
        { encoding: 'utf8' },
      );
    } catch {
      console.warn('python3 with the core package not available; round-trip skipped');
      return;
    }
    expect(stdout.trim()).toBe('100 64 entity number 0 entity number 99');
  });
});

describe('cli', () => {
  it('runs end to end and writes a manifest', async () => {
    const dir = tempDir();
    const entities = writeEntities(dir, ['alpha', 'beta', 'gamma']);
    const out = join(dir, 'out.txt');
    const code = await run(['--entities', entities, '--model', 'hash-trigram-32', '--out', out]);
    expect(code).toBe(0);
    const manifest = JSON.parse(readFileSync(out + '.manifest.json', 'utf8'));
    expect(manifest).toMatchObject({
      model: 'hash-trigram-32',
      pooling: 'mean',
      entity_count: 3,
      dim: 32,
    });
    expect(manifest.sha256).toMatch(/^[0-9a-f]{64}$/);
  });

  it('fails cleanly on an unavailable model', async () => {
    const dir = tempDir();
    const entities = writeEntities(dir, ['alpha']);
    const code = await run([
      '--entities', entities,
      '--model', 'no/such-model',
      '--out', join(dir, 'out.txt'),
    ]);
    expect(code).toBe(1);
  });

  it('fails cleanly on empty input', async () => {
    const dir = tempDir();
    const empty = join(dir, 'none.txt');
    writeFileSync(empty, '', 'utf8');
    const code = await run(['--entities', empty, '--out', join(dir, 'out.txt')]);
    expect(code).toBe(1);
  });
});
