"""Classic similarity flooding over a pairwise-connectivity graph.

Nodes are cross-KG entity pairs; an edge (x1,y1) -> (x2,y2) with label r
exists when (x1,r,x2) is a triplet of KG1 and (y1,r',y2) one of KG2 under the
relation alignment. Each edge carries 1/(number of same-label edges leaving
its source node), and one iteration adds the coefficient-weighted in-flow of
start-values-plus-current-values on top of both, then rescales:

    v_t = normalize(v_0 + v_{t-1} + inflow(v_0 + v_{t-1}))

Intended for small graphs: the node universe is the edge-incident pairs plus
seed pairs, which grows with the product of same-label triplet counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .flood import FloodConfig, FloodResult, NumericError, SimilarityMatrix
from .kg import KnowledgeGraph, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "PairwiseConnectivityGraph",
    "read_relation_map",
    "build_pcg",
    "propagate",
    "sf_fixpoint",
]


@dataclass
class PairwiseConnectivityGraph:
    """Mapping-pair nodes with a column-stochastic-by-label in-flow matrix.

    weights[q, p] is the total propagation coefficient of edges p -> q
    (coefficients of parallel labels add up).
    """

    nodes: list
    node_index: dict
    weights: sp.csr_array
    num_edges: int
    skipped_relations: dict = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)


def read_relation_map(path) -> dict:
    """Tab-separated `kg1_relation_label<TAB>kg2_relation_label` lines."""
    mapping = {}
    with open(path, encoding="utf-8", newline=None) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(
                    f"{path}:{lineno}: expected 2 tab-separated fields, "
                    f"got {len(fields)}"
                )
            mapping[fields[0]] = fields[1]
    return mapping


def _relation_id_map(kg1: KnowledgeGraph, kg2: KnowledgeGraph,
                     relation_alignment: dict | None) -> np.ndarray:
    """Augmented-relation id map kg1 -> kg2, -1 where unmapped. Reverse
    relations are paired with the reverses of their mapped originals."""
    k1, k2 = kg1.num_original_relations, kg2.num_original_relations
    id_map = np.full(kg1.num_relations, -1, dtype=np.int64)
    for r1 in range(k1):
        label1 = kg1.relation_labels[r1]
        label2 = (
            relation_alignment.get(label1)
            if relation_alignment is not None else label1
        )
        if label2 is None:
            continue
        r2 = kg2.relation_ids.get(label2)
        if r2 is None or r2 >= k2:
            continue
        id_map[r1] = r2
        id_map[r1 + k1] = r2 + k2
    return id_map


def build_pcg(kg1: KnowledgeGraph, kg2: KnowledgeGraph,
              relation_alignment: dict | None = None,
              seeds=None) -> PairwiseConnectivityGraph:
    id_map = _relation_id_map(kg1, kg2, relation_alignment)

    by_rel_1 = _triplets_by_relation(kg1)
    by_rel_2 = _triplets_by_relation(kg2)

    skipped = {}
    node_index: dict = {}
    nodes: list = []

    def intern(pair):
        idx = node_index.get(pair)
        if idx is None:
            idx = len(nodes)
            node_index[pair] = idx
            nodes.append(pair)
        return idx

    edges_p, edges_q, edges_r = [], [], []
    for r1 in range(kg1.num_relations):
        t1 = by_rel_1[r1]
        if not len(t1):
            continue
        r2 = id_map[r1]
        if r2 < 0:
            skipped[kg1.relation_labels[r1]] = len(t1)
            continue
        t2 = by_rel_2[r2].tolist()
        for s1, o1 in t1.tolist():
            for s2, o2 in t2:
                edges_p.append(intern((s1, s2)))
                edges_q.append(intern((o1, o2)))
                edges_r.append(r1)

    if skipped:
        logger.warning(
            "%d relations with no counterpart; %d triplets induce no edges",
            len(skipped), sum(skipped.values()),
        )
    for pair in (seeds or ()):
        intern(tuple(pair))

    n = len(nodes)
    if edges_p:
        p = np.asarray(edges_p, dtype=np.int64)
        q = np.asarray(edges_q, dtype=np.int64)
        r = np.asarray(edges_r, dtype=np.int64)
        # coefficient = 1 / #(same-label edges leaving the source node)
        group = p * kg1.num_relations + r
        _, inverse, counts = np.unique(
            group, return_inverse=True, return_counts=True
        )
        data = 1.0 / counts[inverse]
        weights = sp.csr_array((data, (q, p)), shape=(n, n))
    else:
        weights = sp.csr_array((n, n), dtype=np.float64)
    return PairwiseConnectivityGraph(
        nodes=nodes,
        node_index=node_index,
        weights=weights,
        num_edges=len(edges_p),
        skipped_relations=skipped,
    )


def _triplets_by_relation(kg: KnowledgeGraph) -> list:
    """Per-relation (subject, object) pairs."""
    order = np.argsort(kg.triplets[:, 1], kind="stable")
    rel = kg.triplets[order, 1]
    bounds = np.searchsorted(rel, np.arange(kg.num_relations + 1))
    return [
        kg.triplets[order[bounds[r]:bounds[r + 1]]][:, [0, 2]]
        for r in range(kg.num_relations)
    ]


def propagate(pcg: PairwiseConnectivityGraph, values: np.ndarray) -> np.ndarray:
    """Coefficient-weighted in-flow of per-node values."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (pcg.num_nodes,):
        raise ValueError(
            f"expected {pcg.num_nodes} node values, got shape {values.shape}"
        )
    return pcg.weights @ values


def sf_fixpoint(pcg: PairwiseConnectivityGraph, omega0: SimilarityMatrix,
                config: FloodConfig | None = None) -> FloodResult:
    """Iterate the flooding update on the PCG nodes and scatter the final
    per-node values back into a full similarity matrix."""
    config = config or FloodConfig()
    if omega0.columns is not None:
        raise ValueError("column-restricted start matrices are not supported")

    v0 = np.empty(pcg.num_nodes, dtype=np.float64)
    n, m = omega0.values.shape
    for idx, (i, j) in enumerate(pcg.nodes):
        if not (0 <= i < n and 0 <= j < m):
            raise IndexError(f"node pair ({i}, {j}) outside start matrix")
        v0[idx] = omega0.values[i, j]

    v = v0.copy()
    iterations = 0
    converged = False
    for t in range(1, config.max_iterations + 1):
        mixed = v0 + v
        raw = mixed + pcg.weights @ mixed
        scale = float(np.max(np.abs(raw))) if raw.size else 0.0
        if not np.isfinite(scale):
            raise NumericError("flooding values are not finite")
        v_next = raw / scale if scale > 0 else raw
        d = float(np.max(np.abs(v_next - v))) if raw.size else 0.0
        v = v_next
        iterations = t
        if d < config.epsilon:
            converged = True
            break

    out = np.zeros((n, m), dtype=np.float32)
    for idx, (i, j) in enumerate(pcg.nodes):
        out[i, j] = v[idx]
    sim = SimilarityMatrix(out, omega0.block_height)
    return FloodResult(sim, iterations, converged)
