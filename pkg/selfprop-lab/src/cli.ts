// ---------------------------------------------------------------------------
// selfprop-lab — Command-line interface
//
//   selfprop-lab train --dataset DIR [options]   train once, report Hits@1,
//                                                optionally export the score
//                                                matrix and ranking report
//   selfprop-lab sweep --dataset DIR [options]   depth x self-branch sweep,
//                                                emitted as TSV
//
// The --save-omega checkpoint and --report-out report use the companion
// engine's formats, so its `eval` subcommand can rescore a matrix written
// here.
// ---------------------------------------------------------------------------

import * as fs from 'node:fs';
import { pathToFileURL } from 'node:url';
import { parseArgs } from 'node:util';

import { loadDataset, type DatasetFormat } from './dataset.js';
import { formatSweep, oversmoothingSweep, trainedLayerDistance } from './diagnostics.js';
import {
  formatReport,
  hitsAtK,
  meanReciprocalRank,
  rankTargets,
  similarityFromEmbeddings,
  writeCheckpoint,
} from './report.js';
import { defaultTrainerConfig, finalOutputs, train, type TrainerOverrides } from './trainer.js';
import type { ForwardMode, TrainerConfig } from './types.js';

const USAGE = `usage: selfprop-lab <train|sweep> --dataset DIR [options]

common options:
  --dataset DIR          dataset root directory (required)
  --format NAME          openea or dbp15k (default openea)
  --dim N                embedding width (default 16)
  --epochs N             training epochs (default 50)
  --learning-rate F      SGD step size (default 2.0)
  --momentum F           SGD momentum in [0, 1) (default 0.9)
  --margin F             ranking-loss margin (default 1.0)
  --negatives N          negative targets per seed per epoch (default 5)
  --random-seed N        seed for all random draws (default 7)

train options:
  --alpha F              self-branch weight in [0, 1] (default 0.1)
  --layers N             stack depth 1..4 (default 2)
  --mode NAME            selfprop or meanpool (default selfprop)
  --save-omega FILE      write the score matrix as a binary checkpoint
  --report-out FILE      write the ranking report
sweep options:
  --out FILE             write the TSV table (default: stdout)
`;

function parseNumber(name: string, raw: string | undefined, fallback: number): number {
  if (raw === undefined) {
    return fallback;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new Error(`--${name} expects a number, got ${JSON.stringify(raw)}`);
  }
  return value;
}

function buildConfig(values: Record<string, string | undefined>, mode: ForwardMode): TrainerConfig {
  const overrides: TrainerOverrides = {
    layer: {
      alpha: parseNumber('alpha', values['alpha'], 0.1),
      dim: parseNumber('dim', values['dim'], 16),
      numLayers: parseNumber('layers', values['layers'], 2),
    },
    mode,
    epochs: parseNumber('epochs', values['epochs'], 50),
    learningRate: parseNumber('learning-rate', values['learning-rate'], 2.0),
    momentum: parseNumber('momentum', values['momentum'], 0.9),
    margin: parseNumber('margin', values['margin'], 1.0),
    negativesPerSeed: parseNumber('negatives', values['negatives'], 5),
    randomSeed: parseNumber('random-seed', values['random-seed'], 7),
  };
  return defaultTrainerConfig(overrides);
}

function loadPair(values: Record<string, string | undefined>) {
  const dataset = values['dataset'];
  if (!dataset) {
    throw new Error('--dataset is required');
  }
  const format = values['format'] ?? 'openea';
  if (format !== 'openea' && format !== 'dbp15k') {
    throw new Error(`--format must be openea or dbp15k, got ${JSON.stringify(format)}`);
  }
  return loadDataset(dataset, format as DatasetFormat);
}

function cmdTrain(values: Record<string, string | undefined>): number {
  const mode = values['mode'] ?? 'selfprop';
  if (mode !== 'selfprop' && mode !== 'meanpool') {
    throw new Error(`--mode must be selfprop or meanpool, got ${JSON.stringify(mode)}`);
  }
  const pair = loadPair(values);
  const config = buildConfig(values, mode);
  const { state, lossHistory } = train(pair.source, pair.target, pair.seedPairs, config);
  const out = finalOutputs(state, pair.source, pair.target);
  const scores = similarityFromEmbeddings(
    out.source,
    out.target,
    pair.source.numEntities,
    pair.target.numEntities,
    state.config.dim,
  );
  const report = rankTargets(scores, pair.target.numEntities, pair.testPairs);
  const ranks = report.rows.map((row) => row.rank);

  console.log(`epochs\t${state.epoch}`);
  if (lossHistory.length > 0) {
    console.log(`first_loss\t${lossHistory[0]!.toFixed(6)}`);
    console.log(`final_loss\t${lossHistory[lossHistory.length - 1]!.toFixed(6)}`);
  }
  console.log(`hits@1\t${hitsAtK(ranks, 1).toFixed(6)}`);
  console.log(`hits@10\t${hitsAtK(ranks, 10).toFixed(6)}`);
  console.log(`mrr\t${meanReciprocalRank(ranks).toFixed(6)}`);
  if (state.config.numLayers >= 2) {
    console.log(`layer_distance\t${trainedLayerDistance(state, pair.source).toFixed(6)}`);
  }

  const omegaPath = values['save-omega'];
  if (omegaPath) {
    writeCheckpoint(
      omegaPath,
      scores,
      pair.source.numEntities,
      pair.target.numEntities,
      1,
      state.epoch,
    );
  }
  const reportPath = values['report-out'];
  if (reportPath) {
    fs.writeFileSync(
      reportPath,
      formatReport(report, pair.source.entityLabels, pair.target.entityLabels),
    );
  }
  return 0;
}

function cmdSweep(values: Record<string, string | undefined>): number {
  const pair = loadPair(values);
  const config = buildConfig(values, 'selfprop');
  const table = formatSweep(oversmoothingSweep(pair, config));
  const outPath = values['out'];
  if (outPath) {
    fs.writeFileSync(outPath, table);
  } else {
    process.stdout.write(table);
  }
  return 0;
}

/**
 * Run the CLI against an argument list (no program/script prefix).
 *
 * @param argv - Arguments after the script name.
 * @returns Process exit code; errors print to stderr and return 1.
 */
export function runCli(argv: readonly string[]): number {
  const command = argv[0];
  if (command === undefined || command === '--help' || command === '-h') {
    process.stdout.write(USAGE);
    return command === undefined ? 1 : 0;
  }
  try {
    const { values } = parseArgs({
      args: argv.slice(1),
      options: {
        'dataset': { type: 'string' },
        'format': { type: 'string' },
        'alpha': { type: 'string' },
        'dim': { type: 'string' },
        'layers': { type: 'string' },
        'mode': { type: 'string' },
        'epochs': { type: 'string' },
        'learning-rate': { type: 'string' },
        'momentum': { type: 'string' },
        'margin': { type: 'string' },
        'negatives': { type: 'string' },
        'random-seed': { type: 'string' },
        'save-omega': { type: 'string' },
        'report-out': { type: 'string' },
        'out': { type: 'string' },
      },
    });
    if (command === 'train') {
      return cmdTrain(values);
    }
    if (command === 'sweep') {
      return cmdSweep(values);
    }
    throw new Error(`unknown command ${JSON.stringify(command)}`);
  } catch (err) {
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
