export { TrigramHashModel, resolveModel } from './models.js';
export type { EmbeddingModel, Pooling } from './models.js';
export { readEntityList, formatEmbeddingFile, writeExport } from './format.js';
export type { ExportManifest } from './format.js';
export { run } from './cli.js';
