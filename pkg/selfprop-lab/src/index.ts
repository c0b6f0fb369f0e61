// ---------------------------------------------------------------------------
// selfprop-lab — Public API
// ---------------------------------------------------------------------------

export type {
  AffineParams,
  AlignmentPair,
  DatasetPair,
  ForwardMode,
  Graph,
  OptimizerState,
  PRNG,
  RankingRow,
  SelfPropLayerConfig,
  TrainerConfig,
  TrainerState,
} from './types.js';

export { createRng, nextGaussian, randBelow } from './prng.js';

export {
  buildGraph,
  degree,
  hasIsolatedEntities,
  loadDataset,
  loadDbp15k,
  loadOpenea,
  readRows,
  type DatasetFormat,
} from './dataset.js';

export {
  affineTransform,
  assertLayerConfig,
  createAffineParams,
  identityAffineParams,
  meanPoolForward,
  neighborMeanLayer,
  selfpropForward,
  selfpropLayer,
} from './forward.js';

export {
  backwardStack,
  defaultTrainerConfig,
  finalOutputs,
  forwardStack,
  initTrainerState,
  lossAndGradients,
  train,
  type TrainGradients,
  type TrainResult,
  type TrainerOverrides,
} from './trainer.js';

export {
  layerDistance,
  oversmoothingSweep,
  formatSweep,
  trainedLayerDistance,
  type SweepCell,
} from './diagnostics.js';

export {
  formatReport,
  hitsAtK,
  meanReciprocalRank,
  rankTargets,
  readCheckpoint,
  similarityFromEmbeddings,
  writeCheckpoint,
  type Checkpoint,
  type RankingReport,
} from './report.js';

export { runCli } from './cli.js';
