import { createHash } from 'node:crypto';
import { readFileSync, writeFileSync } from 'node:fs';

export interface ExportManifest {
  model: string;
  pooling: string;
  entity_count: number;
  dim: number;
  sha256: string;
}

/** One entity name per line; the trailing newline is trimmed, nothing else. */
export function readEntityList(path: string): string[] {
  const raw = readFileSync(path, 'utf8');
  const lines = raw.split('\n');
  if (lines.length > 0 && lines[lines.length - 1] === '') {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error(`${path}: empty entity list`);
  }
  for (const [i, name] of lines.entries()) {
    if (name === '' || name.includes('\t') || name.includes('\r')) {
      throw new Error(`${path}:${i + 1}: empty name or name with tab/carriage return`);
    }
  }
  return lines;
}

/**
 * Embedding text format: header "N d", then one "name v1 ... vd" row per
 * entity in input order. Names may contain spaces; readers take the last d
 * space-separated tokens as values.
 */
export function formatEmbeddingFile(names: string[], vectors: number[][]): string {
  if (names.length !== vectors.length) {
    throw new Error('names and vectors disagree in length');
  }
  const dim = vectors[0]?.length ?? 0;
  if (dim === 0) {
    throw new Error('vectors are empty');
  }
  const lines = [`${names.length} ${dim}`];
  for (let i = 0; i < names.length; i++) {
    if (vectors[i].length !== dim) {
      throw new Error(`row ${i}: inconsistent dimension`);
    }
    if (vectors[i].some((v) => !Number.isFinite(v))) {
      throw new Error(`row ${i}: non-finite value`);
    }
    lines.push(`${names[i]} ${vectors[i].join(' ')}`);
  }
  return lines.join('\n') + '\n';
}

export function writeExport(
  outPath: string,
  names: string[],
  vectors: number[][],
  model: string,
  pooling: string,
): ExportManifest {
  const content = formatEmbeddingFile(names, vectors);
  writeFileSync(outPath, content, 'utf8');
  const manifest: ExportManifest = {
    model,
    pooling,
    entity_count: names.length,
    dim: vectors[0].length,
    sha256: createHash('sha256').update(content, 'utf8').digest('hex'),
  };
  writeFileSync(outPath + '.manifest.json', JSON.stringify(manifest, null, 2) + '\n', 'utf8');
  return manifest;
}
