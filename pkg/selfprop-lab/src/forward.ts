// ---------------------------------------------------------------------------
// selfprop-lab — Forward propagation
//
// One layer turns entity vectors h into
//
//     out(e) = (1 - alpha) * mean{ h(u) : u neighbor of e } + alpha * (h(e) W + b)
//
// so each entity keeps a weighted copy of its own (affinely transformed)
// state instead of being replaced wholesale by its neighborhood mean. An
// entity with no neighbors has no mean to take; it keeps the self branch
// alone, rescaled to full weight (out = h(e) W + b regardless of alpha).
//
// With alpha = 0 the layer is exactly the plain mean-pooling convolution,
// and with alpha = 1 it ignores the graph entirely — both endpoints are
// computed through the single-branch code path, so no zero-weight
// arithmetic can perturb them.
// ---------------------------------------------------------------------------

import { degree } from './dataset.js';
import { nextGaussian } from './prng.js';
import type { AffineParams, Graph, PRNG, SelfPropLayerConfig } from './types.js';

// ---------------------------------------------------------------------------
// config and shape validation
// ---------------------------------------------------------------------------

/**
 * Validate a layer-stack config.
 *
 * @param config - Candidate config.
 * @throws Error if alpha is outside [0, 1], dim is not a positive integer,
 *         or numLayers is not an integer between 1 and 4.
 */
export function assertLayerConfig(config: SelfPropLayerConfig): void {
  if (!(config.alpha >= 0 && config.alpha <= 1)) {
    throw new Error(`assertLayerConfig: alpha must be in [0, 1], got ${config.alpha}`);
  }
  if (!Number.isInteger(config.dim) || config.dim < 1) {
    throw new Error(`assertLayerConfig: dim must be a positive integer, got ${config.dim}`);
  }
  if (!Number.isInteger(config.numLayers) || config.numLayers < 1 || config.numLayers > 4) {
    throw new Error(
      `assertLayerConfig: numLayers must be an integer in [1, 4], got ${config.numLayers}`,
    );
  }
}

function assertEmbeddingShape(name: string, h: Float64Array, graph: Graph, dim: number): void {
  if (h.length !== graph.numEntities * dim) {
    throw new Error(
      `${name}: embeddings have length ${h.length}, expected ` +
        `${graph.numEntities} entities x ${dim} dims = ${graph.numEntities * dim}`,
    );
  }
}

function assertAffineShape(name: string, params: AffineParams, dim: number): void {
  if (params.weight.length !== dim * dim) {
    throw new Error(
      `${name}: weight has length ${params.weight.length}, expected ${dim}x${dim} = ${dim * dim}`,
    );
  }
  if (params.bias.length !== dim) {
    throw new Error(`${name}: bias has length ${params.bias.length}, expected ${dim}`);
  }
}

// ---------------------------------------------------------------------------
// affine parameter construction
// ---------------------------------------------------------------------------

/**
 * Affine parameters initialized near the identity: W = I + scale * G / sqrt(d)
 * with G standard normal, b = 0. A small scale keeps early layer outputs
 * close to their inputs, which keeps deep stacks stable.
 *
 * @param dim        - Embedding width.
 * @param rng        - Uniform generator (consumed dim*dim gaussians).
 * @param noiseScale - Magnitude of the off-identity noise (default 0.1).
 * @returns Freshly allocated parameters.
 */
export function createAffineParams(dim: number, rng: PRNG, noiseScale = 0.1): AffineParams {
  const weight = new Float64Array(dim * dim);
  const invSqrtDim = 1 / Math.sqrt(dim);
  for (let r = 0; r < dim; r++) {
    for (let c = 0; c < dim; c++) {
      weight[r * dim + c] = (r === c ? 1 : 0) + noiseScale * nextGaussian(rng) * invSqrtDim;
    }
  }
  return { weight, bias: new Float64Array(dim) };
}

/**
 * The exact identity transform: W = I, b = 0.
 *
 * @param dim - Embedding width.
 * @returns Parameters for which h W + b reproduces h exactly.
 */
export function identityAffineParams(dim: number): AffineParams {
  const weight = new Float64Array(dim * dim);
  for (let r = 0; r < dim; r++) {
    weight[r * dim + r] = 1;
  }
  return { weight, bias: new Float64Array(dim) };
}

// ---------------------------------------------------------------------------
// single-layer primitives
// ---------------------------------------------------------------------------

/**
 * Z = H W + b for every entity row.
 *
 * @param h      - numEntities x dim input rows.
 * @param n      - Number of entities.
 * @param dim    - Embedding width.
 * @param params - Affine parameters.
 * @returns numEntities x dim transformed rows.
 */
export function affineTransform(
  h: Float64Array,
  n: number,
  dim: number,
  params: AffineParams,
): Float64Array {
  assertAffineShape('affineTransform', params, dim);
  if (h.length !== n * dim) {
    throw new Error(`affineTransform: input has length ${h.length}, expected ${n * dim}`);
  }
  const weight = params.weight;
  const bias = params.bias;
  const out = new Float64Array(n * dim);
  for (let v = 0; v < n; v++) {
    const rowOff = v * dim;
    for (let f = 0; f < dim; f++) {
      let acc = bias[f]!;
      for (let k = 0; k < dim; k++) {
        acc += h[rowOff + k]! * weight[k * dim + f]!;
      }
      out[rowOff + f] = acc;
    }
  }
  return out;
}

/**
 * Mean of each entity's neighbor rows; entities without neighbors get a
 * zero row.
 *
 * @param h     - numEntities x dim input rows.
 * @param graph - Graph supplying the neighbor sets.
 * @param dim   - Embedding width.
 * @returns numEntities x dim pooled rows.
 */
export function neighborMeanLayer(h: Float64Array, graph: Graph, dim: number): Float64Array {
  assertEmbeddingShape('neighborMeanLayer', h, graph, dim);
  const n = graph.numEntities;
  const out = new Float64Array(n * dim);
  for (let v = 0; v < n; v++) {
    const start = graph.neighborPtr[v]!;
    const end = graph.neighborPtr[v + 1]!;
    if (end === start) {
      continue;
    }
    const rowOff = v * dim;
    for (let e = start; e < end; e++) {
      const uOff = graph.neighborIds[e]! * dim;
      for (let f = 0; f < dim; f++) {
        out[rowOff + f] = out[rowOff + f]! + h[uOff + f]!;
      }
    }
    const invDeg = 1 / (end - start);
    for (let f = 0; f < dim; f++) {
      out[rowOff + f] = out[rowOff + f]! * invDeg;
    }
  }
  return out;
}

/**
 * One mixing layer: blend the neighborhood mean with the transformed self
 * state.
 *
 * Per entity e:
 * - no neighbors: out = h(e) W + b (the self branch at full weight);
 * - alpha = 0:    out = neighbor mean, bitwise;
 * - alpha = 1:    out = h(e) W + b, bitwise;
 * - otherwise:    out = (1 - alpha) * mean + alpha * (h(e) W + b).
 *
 * @param h      - numEntities x dim input rows.
 * @param graph  - Graph supplying the neighbor sets.
 * @param dim    - Embedding width.
 * @param alpha  - Self-branch weight in [0, 1].
 * @param params - Affine parameters of the self branch.
 * @returns numEntities x dim output rows.
 */
export function selfpropLayer(
  h: Float64Array,
  graph: Graph,
  dim: number,
  alpha: number,
  params: AffineParams,
): Float64Array {
  assertEmbeddingShape('selfpropLayer', h, graph, dim);
  assertAffineShape('selfpropLayer', params, dim);
  const n = graph.numEntities;
  const mean = neighborMeanLayer(h, graph, dim);
  const dense = affineTransform(h, n, dim, params);
  const out = new Float64Array(n * dim);
  const meanWeight = 1 - alpha;
  for (let v = 0; v < n; v++) {
    const rowOff = v * dim;
    if (degree(graph, v) === 0 || alpha === 1) {
      for (let f = 0; f < dim; f++) {
        out[rowOff + f] = dense[rowOff + f]!;
      }
    } else if (alpha === 0) {
      for (let f = 0; f < dim; f++) {
        out[rowOff + f] = mean[rowOff + f]!;
      }
    } else {
      for (let f = 0; f < dim; f++) {
        out[rowOff + f] = meanWeight * mean[rowOff + f]! + alpha * dense[rowOff + f]!;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// stacked forwards
// ---------------------------------------------------------------------------

/**
 * Run the full mixing stack and return every layer's output.
 *
 * @param embeddings - numEntities x dim starting rows (layer-0 state).
 * @param graph      - Graph supplying the neighbor sets.
 * @param config     - Stack shape; alpha applies to every layer.
 * @param layers     - One affine transform per layer.
 * @returns Array of numLayers output matrices, shallowest first.
 * @throws Error on any shape mismatch.
 */
export function selfpropForward(
  embeddings: Float64Array,
  graph: Graph,
  config: SelfPropLayerConfig,
  layers: readonly AffineParams[],
): Float64Array[] {
  assertLayerConfig(config);
  assertEmbeddingShape('selfpropForward', embeddings, graph, config.dim);
  if (layers.length !== config.numLayers) {
    throw new Error(
      `selfpropForward: got ${layers.length} affine transforms for ${config.numLayers} layers`,
    );
  }
  const outputs: Float64Array[] = [];
  let h = embeddings;
  for (let i = 0; i < config.numLayers; i++) {
    h = selfpropLayer(h, graph, config.dim, config.alpha, layers[i]!);
    outputs.push(h);
  }
  return outputs;
}

/**
 * Plain mean-pooling stack: every layer replaces each entity's row by its
 * neighborhood mean (zero for entities without neighbors). This is the
 * alpha = 0 reference rule, kept as its own forward for paired runs.
 *
 * @param embeddings - numEntities x dim starting rows.
 * @param graph      - Graph supplying the neighbor sets.
 * @param dim        - Embedding width.
 * @param numLayers  - Stack depth, between 1 and 4.
 * @returns Array of numLayers output matrices, shallowest first.
 */
export function meanPoolForward(
  embeddings: Float64Array,
  graph: Graph,
  dim: number,
  numLayers: number,
): Float64Array[] {
  assertLayerConfig({ alpha: 0, dim, numLayers });
  assertEmbeddingShape('meanPoolForward', embeddings, graph, dim);
  const outputs: Float64Array[] = [];
  let h = embeddings;
  for (let i = 0; i < numLayers; i++) {
    h = neighborMeanLayer(h, graph, dim);
    outputs.push(h);
  }
  return outputs;
}
