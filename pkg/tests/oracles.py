"""Brute-force reference implementations, independent of the package
internals: plain dict counting and dense matrix products. Slow on purpose.

Relations are keyed as (label, is_reverse) so reverse bookkeeping cannot be
confused with label strings.
"""

import math
from collections import Counter, defaultdict

import numpy as np


def dedup(triples):
    seen = set()
    out = []
    for t in triples:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def augment(triples):
    """Dedup and reverse-close; returns (subject, (label, is_reverse), object)."""
    base = dedup(triples)
    out = [(s, (r, False), o) for s, r, o in base]
    out += [(o, (r, True), s) for s, r, o in base]
    return out


def entity_order(triples):
    """First-occurrence order, the same rule the loader uses."""
    order = []
    seen = set()
    for s, _, o in triples:
        for lab in (s, o):
            if lab not in seen:
                seen.add(lab)
                order.append(lab)
    return order


def transe_rows_formula(triples, order=None):
    """Closed-form coefficients from scratch counts:

    lam[i,j] = (|R(i,j)| + sum_r (|T_{i,r}|/|T_r|) (|T_{j,r}| - |T_{j,r~}|))
               / |T_i|
    with r over forward and reverse relations, r~ the reverse of r.
    """
    order = order if order is not None else entity_order(triples)
    aug = augment(triples)
    t_e = Counter(s for s, _, _ in aug)
    t_r = Counter(r for _, r, _ in aug)
    t_er = Counter((s, r) for s, r, _ in aug)
    pair = Counter((s, o) for s, r, o in aug)
    rels = sorted(t_r)
    index = {lab: i for i, lab in enumerate(order)}
    lam = np.zeros((len(order), len(order)))
    for ei in order:
        if t_e[ei] == 0:
            continue
        for ej in order:
            acc = float(pair[(ei, ej)])
            for r in rels:
                uses = t_er[(ei, r)]
                if uses == 0:
                    continue
                r_inv = (r[0], not r[1])
                acc += (uses / t_r[r]) * (
                    t_er[(ej, r)] - t_er[(ej, r_inv)]
                )
            lam[index[ei], index[ej]] = acc / t_e[ei]
    return lam


def transe_rows_expansion(triples, order=None):
    """Per-triplet substitution: each outgoing triplet (x,r,o) contributes o
    minus the average relation offset of r, averaged over x's triplets."""
    order = order if order is not None else entity_order(triples)
    aug = augment(triples)
    by_subject = defaultdict(list)
    by_rel = defaultdict(list)
    for t in aug:
        by_subject[t[0]].append(t)
        by_rel[t[1]].append(t)
    index = {lab: i for i, lab in enumerate(order)}
    lam = np.zeros((len(order), len(order)))
    for ei in order:
        mine = by_subject[ei]
        if not mine:
            continue
        coeff = defaultdict(float)
        for _, r, o in mine:
            coeff[o] += 1.0
            share = 1.0 / len(by_rel[r])
            for s2, _, o2 in by_rel[r]:
                coeff[o2] -= share
                coeff[s2] += share
        for lab, value in coeff.items():
            lam[index[ei], index[lab]] = value / len(mine)
    return lam


def gcn_rows(triples, order=None):
    """Mean-pooling coefficients: 1/#distinct-neighbors over the reverse-closed
    outgoing edges."""
    order = order if order is not None else entity_order(triples)
    neighbors = defaultdict(set)
    for s, _, o in augment(triples):
        neighbors[s].add(o)
    index = {lab: i for i, lab in enumerate(order)}
    lam = np.zeros((len(order), len(order)))
    for ei in order:
        for ej in neighbors[ei]:
            lam[index[ei], index[ej]] = 1.0 / len(neighbors[ei])
    return lam


def dense_product(lam1, om, lam2):
    """lam1 @ om @ lam2.T cell by cell: loop rows of lam1, columns of om,
    rows of lam2, with a plain dot as the innermost reduction."""
    n, m = lam1.shape[0], lam2.shape[0]
    raw = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        left = np.array([np.dot(lam1[i], om[:, c]) for c in range(om.shape[1])])
        for j in range(m):
            raw[i, j] = np.dot(left, lam2[j])
    return raw


def dense_flood(lam1, lam2, start, iterations, reinject_cells=None, base=None):
    """Naive dense fixpoint: explicit-loop matrix products in float64, stored
    back to float32 each iteration, then divided by the max absolute entry
    (mirroring the engine's storage precision, nothing else)."""
    lam1 = np.asarray(lam1, dtype=np.float64)
    lam2 = np.asarray(lam2, dtype=np.float64)
    om = np.asarray(start, dtype=np.float32).copy()
    for _ in range(iterations):
        raw = dense_product(lam1, om.astype(np.float64), lam2)
        if base is not None:
            raw = raw + np.asarray(base, dtype=np.float64)
        if reinject_cells:
            for i, j in reinject_cells:
                raw[i, j] = 1.0
        om = raw.astype(np.float32)
        scale = float(np.max(np.abs(om))) if om.size else 0.0
        if scale not in (0.0, 1.0):
            om = om / np.float32(scale)
    return om


def naive_ranks(matrix, pairs, candidate_ids):
    """Full-sort ranking with (score desc, id asc) order."""
    matrix = np.asarray(matrix)
    ranks = []
    for source, target in pairs:
        order = sorted(
            candidate_ids,
            key=lambda j: (-float(matrix[source, j]), j),
        )
        ranks.append(order.index(target) + 1)
    return ranks


def naive_hits(ranks, k):
    return sum(1 for r in ranks if r <= k) / len(ranks)


def naive_mrr(ranks):
    return math.fsum(1.0 / r for r in ranks) / len(ranks)


def random_label_triples(rng, max_entities=50, max_relations=5,
                         max_triplets=200):
    n = int(rng.integers(2, max_entities + 1))
    k = int(rng.integers(1, max_relations + 1))
    t = int(rng.integers(1, max_triplets + 1))
    return [
        (
            f"e{int(rng.integers(n))}",
            f"r{int(rng.integers(k))}",
            f"e{int(rng.integers(n))}",
        )
        for _ in range(t)
    ]


def relabeled_copy(triples, rng):
    """Same triplets in the same order under a fresh entity naming; returns
    (new_triples, old_label -> new_label)."""
    labels = entity_order(triples)
    perm = rng.permutation(len(labels))
    mapping = {lab: f"x{int(perm[i])}" for i, lab in enumerate(labels)}
    renamed = [(mapping[s], r, mapping[o]) for s, r, o in triples]
    return renamed, mapping


def random_seed_pairs(rng, n, m, count):
    count = min(count, n, m)
    sources = rng.choice(n, size=count, replace=False)
    targets = rng.choice(m, size=count, replace=False)
    return [(int(i), int(j)) for i, j in zip(sources, targets)]
