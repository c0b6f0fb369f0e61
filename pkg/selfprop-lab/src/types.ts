// ---------------------------------------------------------------------------
// selfprop-lab — Shared types
//
// All matrices are flat row-major Float64Array buffers; a matrix of
// `rows x dim` entries stores cell (i, f) at index i * dim + f.
// ---------------------------------------------------------------------------

/** Deterministic pseudo-random generator returning uniforms in [0, 1). */
export type PRNG = () => number;

/**
 * One loaded knowledge graph with dense entity ids.
 *
 * Entities are interned in file order (subject first, then object, line by
 * line), with link-only entities appended afterwards, so the ids here match
 * the companion Python engine's ids for the same files. Neighbor sets are
 * symmetric: every stored triple contributes both directions, and each
 * entity's neighbor list holds the distinct adjacent entities in ascending
 * id order (an entity neighbors itself only through a self-loop triple).
 */
export interface Graph {
  /** Number of entities (rows of any embedding matrix over this graph). */
  numEntities: number;
  /** Original identifier strings; index == entity id. */
  entityLabels: string[];
  /** Inverse of entityLabels. */
  labelIds: Map<string, number>;
  /** CSR row pointers into neighborIds; length numEntities + 1. */
  neighborPtr: Int32Array;
  /** Concatenated per-entity neighbor id lists, each ascending. */
  neighborIds: Int32Array;
  /** Number of directed triples after adding the reverse of each one. */
  numTriples: number;
}

/** An aligned (source entity id, target entity id) pair. */
export type AlignmentPair = readonly [number, number];

/** Two loaded graphs plus their alignment splits. */
export interface DatasetPair {
  source: Graph;
  target: Graph;
  /** Training alignment pairs (the supervision seeds). */
  seedPairs: AlignmentPair[];
  /** Validation pairs (may be empty). */
  validPairs: AlignmentPair[];
  /** Held-out pairs used for ranking evaluation. */
  testPairs: AlignmentPair[];
}

/**
 * Shape of the layer stack.
 *
 * Each layer mixes the mean of an entity's neighbor vectors with an affine
 * transform of the entity's own vector: alpha is the weight of the
 * self branch, 1 - alpha the weight of the neighborhood mean.
 */
export interface SelfPropLayerConfig {
  /** Self-branch mixing weight in [0, 1]; 0 disables the self branch. */
  alpha: number;
  /** Embedding width d. */
  dim: number;
  /** Stack depth L, between 1 and 4. */
  numLayers: number;
}

/** Parameters of one affine transform h -> h W + b. */
export interface AffineParams {
  /** Row-major dim x dim weight matrix. */
  weight: Float64Array;
  /** Bias vector of length dim. */
  bias: Float64Array;
}

/** Which forward rule the trainer runs. */
export type ForwardMode = 'selfprop' | 'meanpool';

/** Momentum buffers, one per trainable tensor. */
export interface OptimizerState {
  sourceVelocity: Float64Array;
  targetVelocity: Float64Array;
  layerVelocities: AffineParams[];
}

/**
 * Everything the trainer updates: both entity embedding tables, the
 * per-layer affine parameters (shared between the two graphs), the
 * momentum buffers, and the epoch counter. All entries stay finite;
 * training aborts as soon as the loss stops being finite.
 */
export interface TrainerState {
  config: SelfPropLayerConfig;
  mode: ForwardMode;
  /** numEntities(source) x dim initial embeddings, updated in place. */
  sourceEmbeddings: Float64Array;
  /** numEntities(target) x dim initial embeddings, updated in place. */
  targetEmbeddings: Float64Array;
  /** One affine transform per layer, applied to both graphs. */
  layers: AffineParams[];
  optimizer: OptimizerState;
  /** Number of completed training epochs. */
  epoch: number;
}

/** Hyperparameters of one training run. */
export interface TrainerConfig {
  layer: SelfPropLayerConfig;
  mode: ForwardMode;
  epochs: number;
  learningRate: number;
  /** Momentum coefficient for the gradient updates (0 = plain SGD). */
  momentum: number;
  /** Margin of the ranking loss. */
  margin: number;
  /** Uniformly sampled negative targets per seed pair per epoch. */
  negativesPerSeed: number;
  /** Seed for every random draw of the run (init + negative sampling). */
  randomSeed: number;
}

/** One ranked test pair. */
export interface RankingRow {
  source: number;
  trueTarget: number;
  /** 1-based rank of the true target among the candidates. */
  rank: number;
  /** Up to ten candidate ids, best first. */
  topTargets: number[];
}
