#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { readEntityList, writeExport } from './format.js';
import { resolveModel, type Pooling } from './models.js';

export async function run(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .scriptName('export-embeddings')
    .option('entities', {
      type: 'string',
      demandOption: true,
      describe: 'file with one entity name per line',
    })
    .option('model', {
      type: 'string',
      default: 'hash-trigram-256',
      describe: 'model id: hash-trigram[-<dim>] (offline) or a transformers.js model',
    })
    .option('pooling', {
      type: 'string',
      choices: ['mean', 'cls'] as const,
      default: 'mean' as Pooling,
      describe: 'token pooling for pretrained models',
    })
    .option('out', { type: 'string', demandOption: true, describe: 'output embedding file' })
    .strict()
    .help()
    .parse();

  try {
    const names = readEntityList(args.entities);
    const model = await resolveModel(args.model);
    const vectors = await model.encode(names, args.pooling as Pooling);
    const manifest = writeExport(args.out, names, vectors, model.id, args.pooling as string);
    console.log(
      `wrote ${manifest.entity_count} x ${manifest.dim} embeddings -> ${args.out} ` +
        `(sha256 ${manifest.sha256.slice(0, 12)}...)`,
    );
    return 0;
  } catch (err) {
    console.error(`export-embeddings: ${(err as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
  run(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
