// ---------------------------------------------------------------------------
// Shared test helpers: fixture paths, tiny graphs, state cloning, and a
// bitwise matrix comparison.
// ---------------------------------------------------------------------------

import { fileURLToPath } from 'node:url';

import { buildGraph, loadOpenea } from '../src/dataset.js';
import type { DatasetPair, Graph, TrainerState } from '../src/types.js';

/** Absolute path of the in-repo fixture dataset (OpenEA layout). */
export const FIXTURE_DIR = fileURLToPath(new URL('../../data/fixture', import.meta.url));

let cachedFixture: DatasetPair | undefined;

/** The fixture pair, loaded once per test process. */
export function fixturePair(): DatasetPair {
  if (cachedFixture === undefined) {
    cachedFixture = loadOpenea(FIXTURE_DIR);
  }
  return cachedFixture;
}

/** Chain a -> b -> c (neighbors become symmetric: b sees both ends). */
export function chainGraph(): Graph {
  return buildGraph([
    ['a', 'r', 'b'],
    ['b', 'r', 'c'],
  ]);
}

/** Two mutually linked entities a and b. */
export function twoEntityGraph(): Graph {
  return buildGraph([['a', 'r', 'b']]);
}

/** A self-loop on a plus an isolated extra entity b. */
export function isolatedEntityGraph(): Graph {
  return buildGraph([['a', 'r', 'a']], ['b']);
}

/** Deep copy of a trainer state (fresh buffers throughout). */
export function cloneState(state: TrainerState): TrainerState {
  return {
    config: { ...state.config },
    mode: state.mode,
    sourceEmbeddings: state.sourceEmbeddings.slice(),
    targetEmbeddings: state.targetEmbeddings.slice(),
    layers: state.layers.map((l) => ({ weight: l.weight.slice(), bias: l.bias.slice() })),
    optimizer: {
      sourceVelocity: state.optimizer.sourceVelocity.slice(),
      targetVelocity: state.optimizer.targetVelocity.slice(),
      layerVelocities: state.optimizer.layerVelocities.map((l) => ({
        weight: l.weight.slice(),
        bias: l.bias.slice(),
      })),
    },
    epoch: state.epoch,
  };
}

/**
 * Index of the first element where the two arrays differ bitwise
 * (Object.is, so -0 vs 0 and NaN patterns count), or -1 if identical.
 */
export function firstBitwiseDifference(a: Float64Array, b: Float64Array): number {
  if (a.length !== b.length) {
    return Math.min(a.length, b.length);
  }
  for (let i = 0; i < a.length; i++) {
    if (!Object.is(a[i], b[i])) {
      return i;
    }
  }
  return -1;
}

/** Median of a non-empty list. */
export function median(values: readonly number[]): number {
  const sorted = values.slice().sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  if (sorted.length % 2 === 1) {
    return sorted[mid]!;
  }
  return (sorted[mid - 1]! + sorted[mid]!) / 2;
}
