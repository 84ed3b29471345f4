import { createHash } from 'node:crypto';

export interface EmbeddingModel {
  readonly id: string;
  readonly dim: number;
  /** Encode names in order; one vector per input. */
  encode(names: string[], pooling: Pooling): Promise<number[][]>;
}

export type Pooling = 'mean' | 'cls';

const HASH_MODEL_PREFIX = 'hash-trigram';

/**
 * Deterministic offline encoder: character trigrams of `#name#` hashed into a
 * fixed-dim count vector (md5 buckets). Identical names give identical rows,
 * no model files or network needed.
 */
export class TrigramHashModel implements EmbeddingModel {
  readonly id: string;
  readonly dim: number;

  constructor(dim: number = 256) {
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`invalid trigram dimension ${dim}`);
    }
    this.id = `${HASH_MODEL_PREFIX}-${dim}`;
    this.dim = dim;
  }

  async encode(names: string[]): Promise<number[][]> {
    return names.map((name) => {
      const vector = new Array<number>(this.dim).fill(0);
      const padded = `#${name}#`;
      if (padded.length < 3) {
        vector[this.bucket(padded)] += 1;
        return vector;
      }
      for (let i = 0; i + 3 <= padded.length; i++) {
        vector[this.bucket(padded.slice(i, i + 3))] += 1;
      }
      return vector;
    });
  }

  private bucket(trigram: string): number {
    const digest = createHash('md5').update(trigram, 'utf8').digest();
    // First 8 bytes little-endian, mod dim (matches the toolkit's fallback).
    const value = digest.readBigUInt64LE(0);
    return Number(value % BigInt(this.dim));
  }
}

/**
 * Pretrained language model via transformers.js, loaded lazily so the
 * exporter works offline with the hash model when the package or weights are
 * unavailable.
 */
class TransformersModel implements EmbeddingModel {
  readonly id: string;
  dim = 0;
  private extractor: any;

  constructor(id: string, extractor: any) {
    this.id = id;
    this.extractor = extractor;
  }

  async encode(names: string[], pooling: Pooling): Promise<number[][]> {
    const rows: number[][] = [];
    for (const name of names) {
      const tensor = await this.extractor(name, {
        pooling: pooling === 'cls' ? 'cls' : 'mean',
        normalize: false,
      });
      const row = Array.from(tensor.data as Float32Array).map(Number);
      if (this.dim === 0) this.dim = row.length;
      rows.push(row);
    }
    return rows;
  }
}

export async function resolveModel(modelId: string): Promise<EmbeddingModel> {
  if (modelId === HASH_MODEL_PREFIX) {
    return new TrigramHashModel();
  }
  const hashMatch = modelId.match(new RegExp(`^${HASH_MODEL_PREFIX}-(\\d+)$`));
  if (hashMatch) {
    return new TrigramHashModel(parseInt(hashMatch[1], 10));
  }
  let pipeline: any;
  try {
    ({ pipeline } = await import('@xenova/transformers' as string));
  } catch {
    throw new Error(
      `model ${modelId} unavailable: install @xenova/transformers for pretrained encoders, ` +
        `or use the built-in "${HASH_MODEL_PREFIX}[-<dim>]" model`,
    );
  }
  try {
    const extractor = await pipeline('feature-extraction', modelId);
    return new TransformersModel(modelId, extractor);
  } catch (err) {
    throw new Error(`model ${modelId} unavailable: ${(err as Error).message}`);
  }
}
