// ---------------------------------------------------------------------------
// selfprop-lab — Depth diagnostics
//
// Deep mean-pooling stacks drive entity vectors toward indistinguishable
// blends (over-smoothing). Two probes quantify that at fixture scale:
//
// 1. layerDistance — how much the representation still moves between the
//    last two layers. A self branch keeps part of each entity's own state,
//    so it shrinks this movement relative to pure mean pooling.
// 2. oversmoothingSweep — alignment accuracy across stack depths 1..4 with
//    the self branch off and on, emitted as a small TSV table.
// ---------------------------------------------------------------------------

import { hitsAtK, rankTargets, similarityFromEmbeddings } from './report.js';
import { finalOutputs, forwardStack, train } from './trainer.js';
import type { DatasetPair, Graph, TrainerConfig, TrainerState } from './types.js';

// ---------------------------------------------------------------------------
// layerDistance — movement between the last two layers
// ---------------------------------------------------------------------------

/**
 * Mean Euclidean distance, over entities, between the outputs of the last
 * two layers of a stack.
 *
 * @param outputs     - Per-layer output matrices, shallowest first.
 * @param numEntities - Row count of each matrix.
 * @param dim         - Embedding width.
 * @returns mean over entities of ||lastRow - previousRow||_2.
 * @throws Error with fewer than two layer outputs.
 */
export function layerDistance(
  outputs: readonly Float64Array[],
  numEntities: number,
  dim: number,
): number {
  if (outputs.length < 2) {
    throw new Error(
      `layerDistance: need at least two layer outputs, got ${outputs.length}`,
    );
  }
  const last = outputs[outputs.length - 1]!;
  const previous = outputs[outputs.length - 2]!;
  if (last.length !== numEntities * dim || previous.length !== numEntities * dim) {
    throw new Error(
      `layerDistance: layer outputs have lengths ${previous.length} and ${last.length}, ` +
        `expected ${numEntities * dim}`,
    );
  }
  let total = 0;
  for (let v = 0; v < numEntities; v++) {
    const off = v * dim;
    let acc = 0;
    for (let f = 0; f < dim; f++) {
      const diff = last[off + f]! - previous[off + f]!;
      acc += diff * diff;
    }
    total += Math.sqrt(acc);
  }
  return total / numEntities;
}

/**
 * layerDistance of a trained state over one of its graphs.
 *
 * @param state - Trainer state (must have at least two layers).
 * @param graph - Which graph to propagate over.
 * @param side  - Whose embedding table to start from (default 'source').
 * @returns Mean movement between the last two layers.
 */
export function trainedLayerDistance(
  state: TrainerState,
  graph: Graph,
  side: 'source' | 'target' = 'source',
): number {
  const embeddings = side === 'source' ? state.sourceEmbeddings : state.targetEmbeddings;
  const { outputs } = forwardStack(state, graph, embeddings);
  return layerDistance(outputs, graph.numEntities, state.config.dim);
}

// ---------------------------------------------------------------------------
// oversmoothingSweep — accuracy across depth and self-branch weight
// ---------------------------------------------------------------------------

/** One sweep cell. */
export interface SweepCell {
  numLayers: number;
  alpha: number;
  hitsAt1: number;
}

/**
 * Train one run per (depth, alpha) grid cell and measure Hits@1 on the
 * held-out pairs.
 *
 * The grid is depths 1..4 crossed with alpha in {0, 0.1} — eight cells.
 * Every cell trains from the same random seed for the same number of
 * epochs, so cells differ only in the stack shape.
 *
 * @param pair       - Loaded dataset pair with seed and test splits.
 * @param baseConfig - Hyperparameters shared by all cells; the cell's
 *                     depth and alpha replace the layer fields.
 * @returns The eight cells, depth-major.
 */
export function oversmoothingSweep(pair: DatasetPair, baseConfig: TrainerConfig): SweepCell[] {
  const cells: SweepCell[] = [];
  for (const numLayers of [1, 2, 3, 4]) {
    for (const alpha of [0, 0.1]) {
      const config: TrainerConfig = {
        ...baseConfig,
        layer: { ...baseConfig.layer, alpha, numLayers },
      };
      const { state } = train(pair.source, pair.target, pair.seedPairs, config);
      const out = finalOutputs(state, pair.source, pair.target);
      const scores = similarityFromEmbeddings(
        out.source,
        out.target,
        pair.source.numEntities,
        pair.target.numEntities,
        state.config.dim,
      );
      const report = rankTargets(scores, pair.target.numEntities, pair.testPairs);
      cells.push({
        numLayers,
        alpha,
        hitsAt1: hitsAtK(report.rows.map((row) => row.rank), 1),
      });
    }
  }
  return cells;
}

/**
 * Render sweep cells as tab-separated text with a header line.
 *
 * @param cells - Sweep output.
 * @returns `layers<TAB>alpha<TAB>hits@1` header plus one row per cell.
 */
export function formatSweep(cells: readonly SweepCell[]): string {
  const lines = ['layers\talpha\thits@1'];
  for (const cell of cells) {
    lines.push(`${cell.numLayers}\t${cell.alpha}\t${cell.hitsAt1.toFixed(6)}`);
  }
  return lines.join('\n') + '\n';
}
