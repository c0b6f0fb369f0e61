"""Learning-free entity alignment for knowledge-graph pairs.

Pipeline: load two graphs plus seed alignment, derive per-graph composition
coefficient matrices (translation- or mean-pooling-based), iterate the
similarity fixpoint to convergence, and rank candidate counterparts. A
classic pairwise-connectivity-graph flooding baseline and name-vector fusion
are included.
"""

from .classic_sf import (
    PairwiseConnectivityGraph,
    build_pcg,
    propagate,
    read_relation_map,
    sf_fixpoint,
)
from .composition import (
    CompositionMatrix,
    apply_right,
    gcn_composition,
    transe_composition,
)
from .evaluation import (
    AlignmentMapping,
    RankingReport,
    RankingRow,
    ResidualReport,
    extract_mapping,
    hits_at_k,
    mrr,
    rank_targets,
    verify_structural_isomorphism,
    write_report,
)
from .flood import (
    FloodConfig,
    FloodResult,
    NumericError,
    SimilarityMatrix,
    delta,
    flood_step,
    init_similarity,
    load_checkpoint,
    normalize,
    run_flood,
    save_checkpoint,
)
from .kg import (
    AlignmentSet,
    ConsistencyError,
    DatasetError,
    DatasetPair,
    EmptyGraphError,
    KnowledgeGraph,
    ParseError,
    ResolutionError,
    load_alignment,
    load_dataset,
    load_dbp15k,
    load_kg,
    load_openea,
)
from .text import NameVectorTable, fuse, load_name_vectors, name_similarity

__version__ = "0.1.0"
