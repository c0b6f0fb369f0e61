"""Composition-coefficient matrices: each row writes one entity as a weighted
combination of entities of the same KG.

Two variants are built from triplet counts alone:

* translation-derived ("transe"): row i is |R(x_i,x_j)|/|T_{x_i}| for direct
  neighbors plus a relation-mediated correction, kept in factored form
  direct + usage @ imbalance because the correction couples every user of a
  relation to every entity with unbalanced use of it (explicit rows would be
  dense at 15K-entity scale);
* mean-pooling ("gcn"): row i spreads 1/|N(x_i)| over distinct neighbors.

Rows of entities with at least one outgoing triplet sum to 1; isolated
entities get zero rows. All data is float64; counts are exact.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .kg import KnowledgeGraph

__all__ = [
    "CompositionMatrix",
    "transe_composition",
    "gcn_composition",
    "apply_right",
]


class CompositionMatrix:
    """Sparse-plus-product form of an n-by-n coefficient matrix.

    The represented matrix is `direct + usage @ imbalance`, with
    direct n×n, usage n×k, imbalance k×n (k = relation count including
    reverses). The gcn variant has no product part (usage/imbalance None).
    """

    def __init__(self, direct, usage=None, imbalance=None, variant="transe"):
        if (usage is None) != (imbalance is None):
            raise ValueError("usage and imbalance must be given together")
        self.direct = direct.tocsr()
        self.usage = usage.tocsr() if usage is not None else None
        self.imbalance = imbalance.tocsr() if imbalance is not None else None
        self.variant = variant
        n = self.direct.shape[0]
        if self.direct.shape != (n, n):
            raise ValueError("direct part must be square")
        if self.usage is not None:
            if self.usage.shape[0] != n or self.imbalance.shape[1] != n:
                raise ValueError("factor shapes disagree with entity count")
            if self.usage.shape[1] != self.imbalance.shape[0]:
                raise ValueError("usage and imbalance inner dimensions differ")

    @property
    def n(self) -> int:
        return self.direct.shape[0]

    def matmul(self, m: np.ndarray) -> np.ndarray:
        """This matrix times a dense (n, k) block, accumulated in float64."""
        m = np.asarray(m)
        if m.ndim != 2 or m.shape[0] != self.n:
            raise ValueError(
                f"operand has shape {m.shape}, expected ({self.n}, k)"
            )
        out = self.direct @ m
        if self.usage is not None:
            out = out + self.usage @ (self.imbalance @ m)
        return np.asarray(out, dtype=np.float64)

    def to_dense(self) -> np.ndarray:
        """Explicit matrix; quadratic in n, intended for small graphs."""
        out = self.direct.toarray()
        if self.usage is not None:
            out = out + (self.usage @ self.imbalance).toarray()
        return out

    def submatrix(self, rows, cols=None) -> "CompositionMatrix":
        """Restriction to the given entity ids (rows; cols default to rows)."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = rows if cols is None else np.asarray(cols, dtype=np.int64)
        usage = self.usage[rows] if self.usage is not None else None
        imbalance = (
            self.imbalance[:, cols] if self.imbalance is not None else None
        )
        return CompositionMatrix(
            self.direct[rows][:, cols], usage, imbalance, self.variant
        )

    def row_sums(self) -> np.ndarray:
        sums = np.asarray(self.direct.sum(axis=1)).ravel()
        if self.usage is not None:
            ones = np.ones((self.n, 1))
            sums = sums + (self.usage @ (self.imbalance @ ones)).ravel()
        return sums

    def dump(self, fileobj) -> None:
        """Write nonzero explicit entries as `row<TAB>col<TAB>value` lines."""
        dense = self.to_dense()
        rows, cols = np.nonzero(dense)
        for i, j in zip(rows.tolist(), cols.tolist()):
            fileobj.write(f"{i}\t{j}\t{float(dense[i, j])!r}\n")


def _per_row_divide(counts: sp.csr_matrix, denom: np.ndarray) -> sp.csr_array:
    """counts[i, j] / denom[i] as float64 csr; rows with denom 0 are dropped.

    True division per entry (not reciprocal multiplication) so the values
    match scalar recomputation bit for bit.
    """
    c = counts.tocsr()
    row_of = np.repeat(
        np.arange(c.shape[0], dtype=np.int64), np.diff(c.indptr)
    )
    keep = denom[row_of] > 0
    data = c.data[keep].astype(np.float64) / denom[row_of[keep]]
    return sp.csr_array(
        (data, (row_of[keep], c.indices[keep])), shape=c.shape
    )


def transe_composition(kg: KnowledgeGraph) -> CompositionMatrix:
    """Translation-derived coefficients in factored form.

    direct[i, j]    = |R(x_i,x_j)| / |T_{x_i}|
    usage[i, r]     = |T_{x_i,r}| / (|T_{x_i}| * |T_r|)
    imbalance[r, j] = |T_{x_j,r}| - |T_{x_j,r^-1}|
    """
    deg = kg.out_degree.astype(np.float64)
    direct = _per_row_divide(kg.pair_relation_count, deg)

    erc = kg.entity_relation_count.tocsr()
    row_of = np.repeat(
        np.arange(kg.num_entities, dtype=np.int64), np.diff(erc.indptr)
    )
    rel_total = kg.triplet_count_by_relation.astype(np.float64)
    denom = deg[row_of] * rel_total[erc.indices]
    usage = sp.csr_array(
        (erc.data.astype(np.float64) / denom, (row_of, erc.indices)),
        shape=erc.shape,
    )

    by_rel = sp.csr_matrix(erc.T)
    k = kg.num_original_relations
    swap = np.concatenate(
        [np.arange(k, 2 * k, dtype=np.int64), np.arange(k, dtype=np.int64)]
    )
    imbalance = sp.csr_array(
        (by_rel - by_rel[swap]).astype(np.float64)
    )
    imbalance.eliminate_zeros()
    return CompositionMatrix(direct, usage, imbalance, variant="transe")


def gcn_composition(kg: KnowledgeGraph) -> CompositionMatrix:
    """Mean-pooling coefficients: 1/|N(x_i)| over distinct neighbors."""
    adjacency = kg.pair_relation_count.tocsr().copy()
    adjacency.data = np.ones_like(adjacency.data)
    direct = _per_row_divide(
        adjacency, kg.neighbor_count.astype(np.float64)
    )
    return CompositionMatrix(direct, variant="gcn")


def apply_right(comp: CompositionMatrix, m: np.ndarray) -> np.ndarray:
    """comp times m for a dense right operand of matching height."""
    return comp.matmul(m)
