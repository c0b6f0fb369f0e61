// ---------------------------------------------------------------------------
// selfprop-lab — Alignment trainer
//
// Learns entity embeddings for a pair of graphs so that seed-aligned
// entities end up close in the final layer's output space. The loss is a
// margin ranking over squared Euclidean distances: for every seed pair
// (s, t) and uniformly sampled negative target t',
//
//     max(0, margin + ||u_s - v_t||^2 - ||u_s - v_t'||^2)
//
// averaged over all (seed, negative) terms. Gradients are computed by
// hand-rolled reverse accumulation through the layer stack; updates are
// SGD with momentum. Everything random (initialization and negative
// sampling) comes from one seeded stream, so runs are reproducible and a
// paired run with a different forward rule sees identical draws.
// ---------------------------------------------------------------------------

import { degree } from './dataset.js';
import {
  assertLayerConfig,
  createAffineParams,
  neighborMeanLayer,
  selfpropLayer,
} from './forward.js';
import { createRng, nextGaussian, randBelow } from './prng.js';
import type {
  AffineParams,
  AlignmentPair,
  ForwardMode,
  Graph,
  SelfPropLayerConfig,
  TrainerConfig,
  TrainerState,
} from './types.js';

// ---------------------------------------------------------------------------
// defaults and validation
// ---------------------------------------------------------------------------

/** TrainerConfig with every field optional, including the layer fields. */
export type TrainerOverrides = Partial<Omit<TrainerConfig, 'layer'>> & {
  layer?: Partial<SelfPropLayerConfig>;
};

/**
 * A workable default hyperparameter set for the in-repo fixture scale.
 *
 * @param overrides - Any fields to replace.
 * @returns A complete TrainerConfig.
 */
export function defaultTrainerConfig(overrides: TrainerOverrides = {}): TrainerConfig {
  return {
    layer: { alpha: 0.1, dim: 16, numLayers: 2, ...(overrides.layer ?? {}) },
    mode: overrides.mode ?? 'selfprop',
    epochs: overrides.epochs ?? 50,
    learningRate: overrides.learningRate ?? 2.0,
    momentum: overrides.momentum ?? 0.9,
    margin: overrides.margin ?? 1.0,
    negativesPerSeed: overrides.negativesPerSeed ?? 5,
    randomSeed: overrides.randomSeed ?? 7,
  };
}

function assertTrainerConfig(config: TrainerConfig): void {
  assertLayerConfig(config.layer);
  if (config.mode !== 'selfprop' && config.mode !== 'meanpool') {
    throw new Error(`train: unknown forward mode ${JSON.stringify(config.mode)}`);
  }
  if (!Number.isInteger(config.epochs) || config.epochs < 0) {
    throw new Error(`train: epochs must be a non-negative integer, got ${config.epochs}`);
  }
  if (!(config.learningRate > 0 && Number.isFinite(config.learningRate))) {
    throw new Error(`train: learning rate must be positive and finite, got ${config.learningRate}`);
  }
  if (!(config.momentum >= 0 && config.momentum < 1)) {
    throw new Error(`train: momentum must be in [0, 1), got ${config.momentum}`);
  }
  if (!(config.margin >= 0 && Number.isFinite(config.margin))) {
    throw new Error(`train: margin must be non-negative and finite, got ${config.margin}`);
  }
  if (!Number.isInteger(config.negativesPerSeed) || config.negativesPerSeed < 1) {
    throw new Error(
      `train: negativesPerSeed must be a positive integer, got ${config.negativesPerSeed}`,
    );
  }
}

function assertSeedsInRange(seeds: readonly AlignmentPair[], source: Graph, target: Graph): void {
  if (seeds.length === 0) {
    throw new Error('train: seeds must be non-empty');
  }
  for (const [s, t] of seeds) {
    if (!Number.isInteger(s) || s < 0 || s >= source.numEntities) {
      throw new Error(`train: seed source id ${s} outside graph of ${source.numEntities} entities`);
    }
    if (!Number.isInteger(t) || t < 0 || t >= target.numEntities) {
      throw new Error(`train: seed target id ${t} outside graph of ${target.numEntities} entities`);
    }
  }
}

// ---------------------------------------------------------------------------
// initTrainerState — embeddings and layer parameters
// ---------------------------------------------------------------------------

/**
 * Fresh trainable state: gaussian embeddings scaled by 1/sqrt(dim) for both
 * graphs, near-identity affine parameters per layer (shared between the
 * graphs), zeroed momentum buffers, epoch 0.
 *
 * Draw order is fixed — source rows, target rows, then layer weights — so
 * two runs from the same stream position initialize identically whatever
 * their forward mode.
 *
 * @param source - Source graph.
 * @param target - Target graph.
 * @param config - Run hyperparameters.
 * @param rng    - Seeded stream to draw from.
 * @returns A TrainerState ready for training.
 */
export function initTrainerState(
  source: Graph,
  target: Graph,
  config: TrainerConfig,
  rng: () => number,
): TrainerState {
  const { dim, numLayers } = config.layer;
  const initRow = (table: Float64Array): void => {
    const scale = 1 / Math.sqrt(dim);
    for (let i = 0; i < table.length; i++) {
      table[i] = nextGaussian(rng) * scale;
    }
  };
  const sourceEmbeddings = new Float64Array(source.numEntities * dim);
  const targetEmbeddings = new Float64Array(target.numEntities * dim);
  initRow(sourceEmbeddings);
  initRow(targetEmbeddings);
  const layers: AffineParams[] = [];
  const layerVelocities: AffineParams[] = [];
  for (let i = 0; i < numLayers; i++) {
    layers.push(createAffineParams(dim, rng));
    layerVelocities.push({ weight: new Float64Array(dim * dim), bias: new Float64Array(dim) });
  }
  return {
    config: { ...config.layer },
    mode: config.mode,
    sourceEmbeddings,
    targetEmbeddings,
    layers,
    optimizer: {
      sourceVelocity: new Float64Array(sourceEmbeddings.length),
      targetVelocity: new Float64Array(targetEmbeddings.length),
      layerVelocities,
    },
    epoch: 0,
  };
}

// ---------------------------------------------------------------------------
// forward/backward through the stack
// ---------------------------------------------------------------------------

function runLayer(state: TrainerState, graph: Graph, h: Float64Array, layer: number): Float64Array {
  const { alpha, dim } = state.config;
  if (state.mode === 'meanpool') {
    return neighborMeanLayer(h, graph, dim);
  }
  return selfpropLayer(h, graph, dim, alpha, state.layers[layer]!);
}

/**
 * Run the state's forward rule over one graph and keep every intermediate.
 *
 * @param state      - Trainer state (mode, config, layer parameters).
 * @param graph      - Graph to propagate over.
 * @param embeddings - Layer-0 rows for this graph.
 * @returns inputs h^0..h^(L-1) and outputs h^1..h^L.
 */
export function forwardStack(
  state: TrainerState,
  graph: Graph,
  embeddings: Float64Array,
): { inputs: Float64Array[]; outputs: Float64Array[] } {
  const inputs: Float64Array[] = [];
  const outputs: Float64Array[] = [];
  let h = embeddings;
  for (let i = 0; i < state.config.numLayers; i++) {
    inputs.push(h);
    h = runLayer(state, graph, h, i);
    outputs.push(h);
  }
  return { inputs, outputs };
}

/**
 * Final-layer outputs for both graphs (the vectors used for search).
 *
 * @param state  - Trainer state.
 * @param source - Source graph.
 * @param target - Target graph.
 * @returns Last-layer rows per graph.
 */
export function finalOutputs(
  state: TrainerState,
  source: Graph,
  target: Graph,
): { source: Float64Array; target: Float64Array } {
  const u = forwardStack(state, source, state.sourceEmbeddings).outputs;
  const v = forwardStack(state, target, state.targetEmbeddings).outputs;
  return { source: u[u.length - 1]!, target: v[v.length - 1]! };
}

/**
 * Reverse accumulation through one graph's stack.
 *
 * Mirrors the forward branch structure exactly: the self branch carries
 * weight alpha (full weight for entities without neighbors) and is skipped
 * outright where its weight is zero, and the neighborhood-mean branch
 * carries weight 1 - alpha (1 in meanpool mode) and is skipped where that
 * is zero. Layer-parameter gradients accumulate into gradWeights/gradBiases
 * (both graphs share the parameters, so call this once per graph with the
 * same buffers).
 *
 * @param state       - Trainer state.
 * @param graph       - Graph the forward ran over.
 * @param inputs      - h^0..h^(L-1) from forwardStack.
 * @param gradOut     - dLoss/dh^L, flat numEntities x dim.
 * @param gradWeights - Per-layer accumulators for dLoss/dW.
 * @param gradBiases  - Per-layer accumulators for dLoss/db.
 * @returns dLoss/dh^0 (the embedding-table gradient for this graph).
 */
export function backwardStack(
  state: TrainerState,
  graph: Graph,
  inputs: readonly Float64Array[],
  gradOut: Float64Array,
  gradWeights: Float64Array[],
  gradBiases: Float64Array[],
): Float64Array {
  const { alpha, dim, numLayers } = state.config;
  const n = graph.numEntities;
  let grad = gradOut;
  for (let layer = numLayers - 1; layer >= 0; layer--) {
    const hIn = inputs[layer]!;
    const next = new Float64Array(n * dim);

    if (state.mode === 'selfprop') {
      const weight = state.layers[layer]!.weight;
      const gradW = gradWeights[layer]!;
      const gradB = gradBiases[layer]!;
      for (let v = 0; v < n; v++) {
        const selfWeight = degree(graph, v) === 0 ? 1 : alpha;
        if (selfWeight === 0) {
          continue;
        }
        const rowOff = v * dim;
        for (let f = 0; f < dim; f++) {
          const gz = selfWeight * grad[rowOff + f]!;
          gradB[f] = gradB[f]! + gz;
          for (let k = 0; k < dim; k++) {
            gradW[k * dim + f] = gradW[k * dim + f]! + hIn[rowOff + k]! * gz;
            next[rowOff + k] = next[rowOff + k]! + gz * weight[k * dim + f]!;
          }
        }
      }
    }

    const meanWeight = state.mode === 'selfprop' ? 1 - alpha : 1;
    if (meanWeight !== 0) {
      for (let v = 0; v < n; v++) {
        const start = graph.neighborPtr[v]!;
        const end = graph.neighborPtr[v + 1]!;
        if (end === start) {
          continue;
        }
        const c = meanWeight / (end - start);
        const rowOff = v * dim;
        for (let e = start; e < end; e++) {
          const uOff = graph.neighborIds[e]! * dim;
          for (let f = 0; f < dim; f++) {
            next[uOff + f] = next[uOff + f]! + c * grad[rowOff + f]!;
          }
        }
      }
    }
    grad = next;
  }
  return grad;
}

// ---------------------------------------------------------------------------
// loss and full-parameter gradients
// ---------------------------------------------------------------------------

/** Gradient buffers matching every trainable tensor. */
export interface TrainGradients {
  source: Float64Array;
  target: Float64Array;
  layerWeights: Float64Array[];
  layerBiases: Float64Array[];
}

function squaredDistance(a: Float64Array, aOff: number, b: Float64Array, bOff: number, dim: number): number {
  let acc = 0;
  for (let f = 0; f < dim; f++) {
    const diff = a[aOff + f]! - b[bOff + f]!;
    acc += diff * diff;
  }
  return acc;
}

/**
 * Margin-ranking loss and its gradients w.r.t. every trainable tensor, for
 * one fixed draw of negatives. Pure in the state: repeated calls with the
 * same arguments return the same numbers, which is what the finite-
 * difference gradient check relies on.
 *
 * @param source    - Source graph.
 * @param target    - Target graph.
 * @param seeds     - Seed alignment pairs.
 * @param negatives - seeds.length * negativesPerSeed sampled target ids,
 *                    row-major by seed.
 * @param margin    - Ranking margin.
 * @param state     - Trainer state to differentiate at.
 * @returns The scalar loss (mean over seed-negative terms) and gradients.
 */
export function lossAndGradients(
  source: Graph,
  target: Graph,
  seeds: readonly AlignmentPair[],
  negatives: Int32Array,
  margin: number,
  state: TrainerState,
): { loss: number; grads: TrainGradients } {
  const dim = state.config.dim;
  if (seeds.length === 0) {
    throw new Error('lossAndGradients: seeds must be non-empty');
  }
  if (negatives.length % seeds.length !== 0) {
    throw new Error(
      `lossAndGradients: ${negatives.length} negatives do not divide into ${seeds.length} seeds`,
    );
  }
  const perSeed = negatives.length / seeds.length;
  const fwdSource = forwardStack(state, source, state.sourceEmbeddings);
  const fwdTarget = forwardStack(state, target, state.targetEmbeddings);
  const u = fwdSource.outputs[fwdSource.outputs.length - 1]!;
  const v = fwdTarget.outputs[fwdTarget.outputs.length - 1]!;

  const gradU = new Float64Array(u.length);
  const gradV = new Float64Array(v.length);
  const scale = 1 / (seeds.length * perSeed);
  let loss = 0;
  for (let si = 0; si < seeds.length; si++) {
    const [s, t] = seeds[si]!;
    const sOff = s * dim;
    const tOff = t * dim;
    const dPos = squaredDistance(u, sOff, v, tOff, dim);
    for (let k = 0; k < perSeed; k++) {
      const tn = negatives[si * perSeed + k]!;
      const tnOff = tn * dim;
      const dNeg = squaredDistance(u, sOff, v, tnOff, dim);
      const hinge = margin + dPos - dNeg;
      if (hinge <= 0) {
        continue;
      }
      loss += hinge;
      const g = 2 * scale;
      for (let f = 0; f < dim; f++) {
        const posDiff = u[sOff + f]! - v[tOff + f]!;
        const negDiff = u[sOff + f]! - v[tnOff + f]!;
        gradU[sOff + f] = gradU[sOff + f]! + g * (posDiff - negDiff);
        gradV[tOff + f] = gradV[tOff + f]! - g * posDiff;
        gradV[tnOff + f] = gradV[tnOff + f]! + g * negDiff;
      }
    }
  }
  loss *= scale;

  const dim2 = dim * dim;
  const layerWeights: Float64Array[] = [];
  const layerBiases: Float64Array[] = [];
  for (let i = 0; i < state.config.numLayers; i++) {
    layerWeights.push(new Float64Array(dim2));
    layerBiases.push(new Float64Array(dim));
  }
  const gradSource = backwardStack(state, source, fwdSource.inputs, gradU, layerWeights, layerBiases);
  const gradTarget = backwardStack(state, target, fwdTarget.inputs, gradV, layerWeights, layerBiases);
  return {
    loss,
    grads: { source: gradSource, target: gradTarget, layerWeights, layerBiases },
  };
}

// ---------------------------------------------------------------------------
// SGD with momentum
// ---------------------------------------------------------------------------

function applyUpdate(
  params: Float64Array,
  velocity: Float64Array,
  grad: Float64Array,
  learningRate: number,
  momentum: number,
): void {
  for (let i = 0; i < params.length; i++) {
    const v = momentum * velocity[i]! - learningRate * grad[i]!;
    velocity[i] = v;
    params[i] = params[i]! + v;
  }
}

function assertStateFinite(state: TrainerState, epoch: number): void {
  const check = (buf: Float64Array, name: string): void => {
    for (let i = 0; i < buf.length; i++) {
      if (!Number.isFinite(buf[i]!)) {
        throw new Error(`train: ${name} became non-finite at epoch ${epoch} (index ${i})`);
      }
    }
  };
  check(state.sourceEmbeddings, 'source embeddings');
  check(state.targetEmbeddings, 'target embeddings');
  for (let i = 0; i < state.layers.length; i++) {
    check(state.layers[i]!.weight, `layer ${i} weight`);
    check(state.layers[i]!.bias, `layer ${i} bias`);
  }
}

// ---------------------------------------------------------------------------
// train — the full loop
// ---------------------------------------------------------------------------

/** A finished (or zero-epoch) training run. */
export interface TrainResult {
  state: TrainerState;
  /** Per-epoch loss values, oldest first; empty when epochs = 0. */
  lossHistory: number[];
}

/**
 * Train alignment embeddings from seed pairs.
 *
 * Runs `config.epochs` full-batch epochs. Each epoch draws
 * `config.negativesPerSeed` uniform negative targets per seed, computes the
 * margin-ranking loss and its gradients, and applies one SGD-with-momentum
 * step to the embedding tables and layer parameters. With epochs = 0 the
 * returned state is the untrained initialization, useful as a baseline.
 *
 * @param source - Source graph.
 * @param target - Target graph.
 * @param seeds  - Non-empty seed alignment pairs, ids in range.
 * @param config - Run hyperparameters (validated here).
 * @returns The trained state plus the per-epoch loss trajectory.
 * @throws Error on invalid config or seeds, or if the loss stops being
 *         finite (divergence) — the state is not updated past that point.
 */
export function train(
  source: Graph,
  target: Graph,
  seeds: readonly AlignmentPair[],
  config: TrainerConfig,
): TrainResult {
  assertTrainerConfig(config);
  assertSeedsInRange(seeds, source, target);
  const rng = createRng(config.randomSeed);
  const state = initTrainerState(source, target, config, rng);
  const lossHistory: number[] = [];
  const numNegatives = seeds.length * config.negativesPerSeed;
  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    const negatives = new Int32Array(numNegatives);
    for (let i = 0; i < numNegatives; i++) {
      negatives[i] = randBelow(rng, target.numEntities);
    }
    const { loss, grads } = lossAndGradients(
      source,
      target,
      seeds,
      negatives,
      config.margin,
      state,
    );
    if (!Number.isFinite(loss)) {
      throw new Error(
        `train: loss became non-finite (${loss}) at epoch ${epoch}; ` +
          'lower the learning rate or the embedding scale',
      );
    }
    applyUpdate(
      state.sourceEmbeddings,
      state.optimizer.sourceVelocity,
      grads.source,
      config.learningRate,
      config.momentum,
    );
    applyUpdate(
      state.targetEmbeddings,
      state.optimizer.targetVelocity,
      grads.target,
      config.learningRate,
      config.momentum,
    );
    for (let i = 0; i < state.layers.length; i++) {
      applyUpdate(
        state.layers[i]!.weight,
        state.optimizer.layerVelocities[i]!.weight,
        grads.layerWeights[i]!,
        config.learningRate,
        config.momentum,
      );
      applyUpdate(
        state.layers[i]!.bias,
        state.optimizer.layerVelocities[i]!.bias,
        grads.layerBiases[i]!,
        config.learningRate,
        config.momentum,
      );
    }
    assertStateFinite(state, epoch);
    state.epoch = epoch;
    lossHistory.push(loss);
  }
  return { state, lossHistory };
}
