// ---------------------------------------------------------------------------
// selfprop-lab — Scoring, ranking, and export formats
//
// The export formats here are byte-compatible with the companion Python
// engine: the binary similarity checkpoint is a 16-byte little-endian
// header (rows, cols, block height, iteration as int32) followed by the
// row-major float32 cells, and the text report starts with
// `# key<TAB>value` metric lines followed by one ranked row per test pair.
// That engine's `eval` subcommand can therefore score a checkpoint written
// by this package directly.
// ---------------------------------------------------------------------------

import * as fs from 'node:fs';

import type { AlignmentPair, RankingRow } from './types.js';

// ---------------------------------------------------------------------------
// similarityFromEmbeddings — negative squared distance scores
// ---------------------------------------------------------------------------

/**
 * Dense similarity matrix between two embedding tables: cell (i, j) is the
 * negative squared Euclidean distance between source row i and target row
 * j, so closer pairs score higher.
 *
 * @param sourceRows - numSources x dim final-layer rows.
 * @param targetRows - numTargets x dim final-layer rows.
 * @param numSources - Number of source entities.
 * @param numTargets - Number of target entities.
 * @param dim        - Embedding width.
 * @returns Flat row-major numSources x numTargets score matrix.
 * @throws Error if either table's length disagrees with its row count.
 */
export function similarityFromEmbeddings(
  sourceRows: Float64Array,
  targetRows: Float64Array,
  numSources: number,
  numTargets: number,
  dim: number,
): Float64Array {
  if (sourceRows.length !== numSources * dim) {
    throw new Error(
      `similarityFromEmbeddings: source table has length ${sourceRows.length}, ` +
        `expected ${numSources * dim}`,
    );
  }
  if (targetRows.length !== numTargets * dim) {
    throw new Error(
      `similarityFromEmbeddings: target table has length ${targetRows.length}, ` +
        `expected ${numTargets * dim}`,
    );
  }
  const scores = new Float64Array(numSources * numTargets);
  for (let i = 0; i < numSources; i++) {
    const iOff = i * dim;
    for (let j = 0; j < numTargets; j++) {
      const jOff = j * dim;
      let acc = 0;
      for (let f = 0; f < dim; f++) {
        const diff = sourceRows[iOff + f]! - targetRows[jOff + f]!;
        acc += diff * diff;
      }
      scores[i * numTargets + j] = -acc;
    }
  }
  return scores;
}

// ---------------------------------------------------------------------------
// rankTargets — candidate ranking with deterministic tie handling
// ---------------------------------------------------------------------------

/** Ranked rows plus the candidate pool size. */
export interface RankingReport {
  rows: RankingRow[];
  numCandidates: number;
}

/**
 * Rank candidate targets for every test source row.
 *
 * Candidates default to the test pairs' own target entities. A true
 * target's rank is one plus the number of strictly higher-scoring
 * candidates plus the number of equal-scoring candidates with a smaller
 * id, and the top list orders by score descending then id ascending — the
 * same deterministic tie rules as the companion engine, so reports over
 * the same scores agree row for row.
 *
 * @param scores       - Flat row-major numSources x numTargets similarities.
 * @param numTargets   - Column count of the score matrix.
 * @param testPairs    - Evaluation pairs (source id, true target id).
 * @param candidateIds - Optional explicit candidate pool (deduped here).
 * @param topK         - Length cap of each row's top list (default 10).
 * @returns Ranked rows in test-pair order plus the pool size.
 * @throws Error on an empty test set, a source id outside the matrix, or a
 *         true target missing from the candidate pool.
 */
export function rankTargets(
  scores: Float64Array,
  numTargets: number,
  testPairs: readonly AlignmentPair[],
  candidateIds?: readonly number[],
  topK = 10,
): RankingReport {
  if (testPairs.length === 0) {
    throw new Error('rankTargets: no test pairs to rank');
  }
  const pool = candidateIds ?? testPairs.map(([, t]) => t);
  const cand = Array.from(new Set(pool)).sort((a, b) => a - b);
  for (const j of cand) {
    if (!Number.isInteger(j) || j < 0 || j >= numTargets) {
      throw new Error(`rankTargets: candidate id ${j} outside the ${numTargets} target columns`);
    }
  }
  const numSources = scores.length / numTargets;
  const rows: RankingRow[] = [];
  for (const [source, target] of testPairs) {
    if (!Number.isInteger(source) || source < 0 || source >= numSources) {
      throw new Error(`rankTargets: source id ${source} outside similarity matrix`);
    }
    if (!cand.includes(target)) {
      throw new Error(`rankTargets: true target ${target} is not in the candidate pool`);
    }
    const rowOff = source * numTargets;
    const sTrue = scores[rowOff + target]!;
    let stronger = 0;
    let tiedEarlier = 0;
    for (const j of cand) {
      const s = scores[rowOff + j]!;
      if (s > sTrue) {
        stronger++;
      } else if (s === sTrue && j < target) {
        tiedEarlier++;
      }
    }
    const order = cand
      .slice()
      .sort((a, b) => scores[rowOff + b]! - scores[rowOff + a]! || a - b)
      .slice(0, topK);
    rows.push({
      source,
      trueTarget: target,
      rank: stronger + tiedEarlier + 1,
      topTargets: order,
    });
  }
  return { rows, numCandidates: cand.length };
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

/**
 * Fraction of ranks at or below k.
 *
 * @param ranks - 1-based ranks.
 * @param k     - Cutoff.
 * @returns Value in [0, 1].
 * @throws Error on an empty rank list.
 */
export function hitsAtK(ranks: readonly number[], k: number): number {
  if (ranks.length === 0) {
    throw new Error('hitsAtK: empty rank list');
  }
  let hits = 0;
  for (const r of ranks) {
    if (r <= k) {
      hits++;
    }
  }
  return hits / ranks.length;
}

/**
 * Mean reciprocal rank, with a compensated (Neumaier) sum so tiny terms are
 * not swallowed by large partial sums.
 *
 * @param ranks - 1-based ranks.
 * @returns Value in (0, 1].
 * @throws Error on an empty rank list.
 */
export function meanReciprocalRank(ranks: readonly number[]): number {
  if (ranks.length === 0) {
    throw new Error('meanReciprocalRank: empty rank list');
  }
  let sum = 0;
  let compensation = 0;
  for (const r of ranks) {
    const term = 1 / r;
    const t = sum + term;
    if (Math.abs(sum) >= Math.abs(term)) {
      compensation += sum - t + term;
    } else {
      compensation += term - t + sum;
    }
    sum = t;
  }
  return (sum + compensation) / ranks.length;
}

// ---------------------------------------------------------------------------
// formatReport — the text export
// ---------------------------------------------------------------------------

/**
 * Render a ranking report in the engine-compatible text format:
 * `# hits@1/hits@10/mrr` to six decimals, `# pairs`, `# candidates`, any
 * extra metrics in sorted key order, then one
 * `source<TAB>true_target<TAB>rank<TAB>comma-joined top targets` row per
 * test pair, all using entity labels.
 *
 * @param report       - Ranked rows plus pool size.
 * @param sourceLabels - Source entity labels by id.
 * @param targetLabels - Target entity labels by id.
 * @param extraMetrics - Optional additional `# key` lines.
 * @returns The complete report text, newline-terminated.
 */
export function formatReport(
  report: RankingReport,
  sourceLabels: readonly string[],
  targetLabels: readonly string[],
  extraMetrics: Record<string, string | number> = {},
): string {
  const ranks = report.rows.map((row) => row.rank);
  const lines: string[] = [
    `# hits@1\t${hitsAtK(ranks, 1).toFixed(6)}`,
    `# hits@10\t${hitsAtK(ranks, 10).toFixed(6)}`,
    `# mrr\t${meanReciprocalRank(ranks).toFixed(6)}`,
    `# pairs\t${ranks.length}`,
    `# candidates\t${report.numCandidates}`,
  ];
  for (const key of Object.keys(extraMetrics).sort()) {
    lines.push(`# ${key}\t${extraMetrics[key]}`);
  }
  for (const row of report.rows) {
    const top = row.topTargets.map((t) => targetLabels[t]!).join(',');
    lines.push(
      `${sourceLabels[row.source]!}\t${targetLabels[row.trueTarget]!}\t${row.rank}\t${top}`,
    );
  }
  return lines.join('\n') + '\n';
}

// ---------------------------------------------------------------------------
// checkpoint binary I/O
// ---------------------------------------------------------------------------

const HEADER_BYTES = 16;

/**
 * Write a similarity matrix as an engine-compatible binary checkpoint:
 * little-endian int32 (rows, cols, blockHeight, iteration), then the cells
 * as row-major little-endian float32.
 *
 * @param filePath    - Destination file.
 * @param values      - Flat row-major rows x cols cells (any numeric array).
 * @param rows        - Row count.
 * @param cols        - Column count.
 * @param blockHeight - Row partition height to record (default 1).
 * @param iteration   - Iteration counter to record (default 0).
 * @throws Error if values.length differs from rows * cols.
 */
export function writeCheckpoint(
  filePath: string,
  values: Float64Array | Float32Array,
  rows: number,
  cols: number,
  blockHeight = 1,
  iteration = 0,
): void {
  if (values.length !== rows * cols) {
    throw new Error(
      `writeCheckpoint: ${values.length} cells do not fill a ${rows}x${cols} matrix`,
    );
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * rows * cols);
  buf.writeInt32LE(rows, 0);
  buf.writeInt32LE(cols, 4);
  buf.writeInt32LE(blockHeight, 8);
  buf.writeInt32LE(iteration, 12);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(Math.fround(values[i]!), HEADER_BYTES + 4 * i);
  }
  fs.writeFileSync(filePath, buf);
}

/** A decoded checkpoint. */
export interface Checkpoint {
  rows: number;
  cols: number;
  blockHeight: number;
  iteration: number;
  /** Row-major float32 cells widened to float64. */
  values: Float64Array;
}

/**
 * Read a checkpoint written by this package or by the companion engine.
 *
 * @param filePath - Checkpoint file.
 * @returns Header fields and the cells.
 * @throws Error on a truncated header, negative dimensions, or a byte
 *         count that disagrees with the header.
 */
export function readCheckpoint(filePath: string): Checkpoint {
  const buf = fs.readFileSync(filePath);
  if (buf.length < HEADER_BYTES) {
    throw new Error(`${filePath}: truncated checkpoint header`);
  }
  const rows = buf.readInt32LE(0);
  const cols = buf.readInt32LE(4);
  const blockHeight = buf.readInt32LE(8);
  const iteration = buf.readInt32LE(12);
  if (rows < 0 || cols < 0 || blockHeight < 1 || iteration < 0) {
    throw new Error(`${filePath}: corrupt checkpoint header`);
  }
  const expected = HEADER_BYTES + 4 * rows * cols;
  if (buf.length !== expected) {
    throw new Error(`${filePath}: checkpoint is ${buf.length} bytes, expected ${expected}`);
  }
  const values = new Float64Array(rows * cols);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i);
  }
  return { rows, cols, blockHeight, iteration, values };
}
