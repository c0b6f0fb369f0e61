"""Name-feature similarity: load per-entity name vectors and build a cosine
similarity matrix that can start (and optionally keep feeding) the flooding
iteration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .flood import DEFAULT_BLOCK_HEIGHT, SimilarityMatrix
from .kg import KnowledgeGraph, ParseError

logger = logging.getLogger(__name__)

__all__ = [
    "NameVectorTable",
    "load_name_vectors",
    "name_similarity",
    "fuse",
]


@dataclass
class NameVectorTable:
    vectors: np.ndarray      # (num_entities, dim) float64, zero where absent
    covered: np.ndarray      # (num_entities,) bool
    dim: int

    @property
    def coverage(self) -> float:
        return float(np.count_nonzero(self.covered)) / len(self.covered)


def load_name_vectors(path, kg: KnowledgeGraph) -> NameVectorTable:
    """File lines: `entity_label<TAB>v1<TAB>v2...`. Labels not present in the
    graph are skipped (vector files may cover several graphs at once)."""
    vectors = None
    covered = np.zeros(kg.num_entities, dtype=bool)
    dim = None
    unknown = 0
    with open(path, encoding="utf-8", newline=None) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ParseError(f"{path}:{lineno}: no vector components")
            label = fields[0]
            if dim is None:
                dim = len(fields) - 1
                vectors = np.zeros((kg.num_entities, dim), dtype=np.float64)
            elif len(fields) - 1 != dim:
                raise ParseError(
                    f"{path}:{lineno}: vector has {len(fields) - 1} "
                    f"components, expected {dim}"
                )
            entity = kg.entity_ids.get(label)
            if entity is None:
                unknown += 1
                continue
            try:
                row = [float(x) for x in fields[1:]]
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: non-numeric vector component"
                ) from None
            if not np.all(np.isfinite(row)):
                raise ParseError(f"{path}:{lineno}: non-finite vector component")
            vectors[entity] = row
            covered[entity] = True
    if dim is None:
        raise ParseError(f"{path}: no vectors found")
    if unknown:
        logger.info("%s: %d lines for entities not in this graph", path, unknown)
    return NameVectorTable(vectors=vectors, covered=covered, dim=dim)


def name_similarity(table1: NameVectorTable, table2: NameVectorTable,
                    block_height: int = DEFAULT_BLOCK_HEIGHT) -> SimilarityMatrix:
    """Cosine similarity of name vectors; 0 wherever a side has no vector
    (or a zero vector, whose direction is undefined)."""
    if table1.dim != table2.dim:
        raise ValueError(
            f"vector dimensions differ: {table1.dim} vs {table2.dim}"
        )
    unit1 = _unit_rows(table1)
    unit2_t = _unit_rows(table2).T
    n = unit1.shape[0]
    out = np.empty((n, unit2_t.shape[1]), dtype=np.float32)
    for lo in range(0, n, block_height):
        hi = min(lo + block_height, n)
        out[lo:hi] = unit1[lo:hi] @ unit2_t
    return SimilarityMatrix(out, block_height)


def _unit_rows(table: NameVectorTable) -> np.ndarray:
    norms = np.linalg.norm(table.vectors, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return table.vectors / safe[:, None]


def fuse(text_sim: SimilarityMatrix, seeds, gamma: float) -> SimilarityMatrix:
    """gamma-scaled text similarity with seed-pair entries forced to 1.

    The result is the start matrix of a flooding run; with reinjection it is
    also re-added before every normalization.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    values = text_sim.values * gamma
    # gamma * (-x) can produce -0.0; keep zeros positive so a gamma=0 fuse
    # is bit-identical to a plain seeded start
    np.copyto(values, 0.0, where=(values == 0))
    fused = SimilarityMatrix(values, text_sim.block_height, text_sim.columns)
    for i, j in (seeds or ()):
        if not 0 <= i < fused.values.shape[0]:
            raise IndexError(f"source id {i} outside similarity matrix")
        fused.values[i, fused.column_position(j)] = 1.0
    return fused
