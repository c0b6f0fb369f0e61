import io

import numpy as np
import pytest

import oracles
from conftest import CHAIN, CHAIN_GCN, CHAIN_TRANSE
from kgflood import (
    KnowledgeGraph,
    apply_right,
    gcn_composition,
    transe_composition,
)


def test_chain_transe_hand_values(chain_kg):
    dense = transe_composition(chain_kg).to_dense()
    for (si, sj), expected in CHAIN_TRANSE.items():
        i, j = chain_kg.resolve(si), chain_kg.resolve(sj)
        assert dense[i, j] == pytest.approx(expected, abs=1e-15)


def test_chain_gcn_hand_values(chain_kg):
    dense = gcn_composition(chain_kg).to_dense()
    expected = np.zeros((3, 3))
    for (si, sj), v in CHAIN_GCN.items():
        expected[chain_kg.resolve(si), chain_kg.resolve(sj)] = v
    np.testing.assert_allclose(dense, expected, atol=1e-15)


def test_single_triplet_self_coefficient():
    g = KnowledgeGraph.from_label_triplets([("a", "r", "b")])
    dense = transe_composition(g).to_dense()
    a, b = g.resolve("a"), g.resolve("b")
    assert dense[a, a] == pytest.approx(1.0, abs=1e-15)
    assert dense[a, b] == pytest.approx(0.0, abs=1e-15)


def test_isolated_entity_rows_are_zero():
    g = KnowledgeGraph.from_label_triplets(CHAIN, extra_entities=["ghost"])
    ghost = g.resolve("ghost")
    for build in (transe_composition, gcn_composition):
        comp = build(g)
        assert not comp.to_dense()[ghost].any()
        assert comp.row_sums()[ghost] == 0.0


def test_star_hub_gcn():
    g = KnowledgeGraph.from_label_triplets(
        [("h", "r", f"s{i}") for i in range(4)]
    )
    dense = gcn_composition(g).to_dense()
    h = g.resolve("h")
    row = dense[h]
    assert np.count_nonzero(row) == 4
    np.testing.assert_allclose(row[row != 0], 0.25)


def test_self_loop_keeps_rows_stochastic():
    g = KnowledgeGraph.from_label_triplets([("a", "r", "a"), ("a", "r", "b")])
    a = g.resolve("a")
    assert gcn_composition(g).to_dense()[a, a] == pytest.approx(0.5)
    np.testing.assert_allclose(transe_composition(g).row_sums(),
                               np.ones(2), atol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_factored_equals_explicit(seed):
    rng = np.random.default_rng(seed)
    g = KnowledgeGraph.from_label_triplets(oracles.random_label_triples(rng))
    comp = transe_composition(g)
    explicit = (
        comp.direct.toarray()
        + comp.usage.toarray() @ comp.imbalance.toarray()
    )
    np.testing.assert_allclose(comp.to_dense(), explicit, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_gcn_matches_scratch_recount(seed):
    rng = np.random.default_rng(50 + seed)
    triples = oracles.random_label_triples(rng)
    g = KnowledgeGraph.from_label_triplets(triples)
    np.testing.assert_allclose(gcn_composition(g).to_dense(),
                               oracles.gcn_rows(triples), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_apply_right_matches_dense_product(seed):
    rng = np.random.default_rng(100 + seed)
    g = KnowledgeGraph.from_label_triplets(oracles.random_label_triples(rng))
    for build in (transe_composition, gcn_composition):
        comp = build(g)
        dense = comp.to_dense()
        m = rng.normal(size=(g.num_entities, 3))
        np.testing.assert_allclose(apply_right(comp, m), dense @ m,
                                   atol=1e-12)
        eye = np.eye(g.num_entities)
        np.testing.assert_allclose(apply_right(comp, eye), dense, atol=1e-12)
        assert not apply_right(comp, np.zeros_like(m)).any()


def test_apply_right_dimension_mismatch(chain_kg):
    comp = transe_composition(chain_kg)
    with pytest.raises(ValueError):
        apply_right(comp, np.zeros((5, 2)))
    with pytest.raises(ValueError):
        apply_right(comp, np.zeros(3))


def test_row_sums_and_ranges_small_corpus():
    rng = np.random.default_rng(42)
    for _ in range(20):
        triples = oracles.random_label_triples(rng)
        g = KnowledgeGraph.from_label_triplets(triples)
        t = transe_composition(g)
        np.testing.assert_allclose(t.row_sums(), np.ones(g.num_entities),
                                   atol=1e-9)
        gc = gcn_composition(g)
        dense = gc.to_dense()
        assert dense.min() >= 0.0 and dense.max() <= 1.0
        np.testing.assert_allclose(gc.row_sums(), np.ones(g.num_entities),
                                   atol=1e-9)
        assert t.variant == "transe" and gc.variant == "gcn"


def test_submatrix_equals_dense_slice():
    rng = np.random.default_rng(5)
    g = KnowledgeGraph.from_label_triplets(oracles.random_label_triples(rng))
    comp = transe_composition(g)
    dense = comp.to_dense()
    idx = rng.choice(g.num_entities, size=min(4, g.num_entities),
                     replace=False)
    sub = comp.submatrix(idx)
    np.testing.assert_array_equal(sub.to_dense(), dense[np.ix_(idx, idx)])


def test_dump_roundtrip(chain_kg):
    comp = transe_composition(chain_kg)
    buf = io.StringIO()
    comp.dump(buf)
    parsed = {}
    for line in buf.getvalue().splitlines():
        i, j, v = line.split("\t")
        parsed[(int(i), int(j))] = float(v)
    dense = comp.to_dense()
    for (i, j), v in parsed.items():
        assert dense[i, j] == v
    assert len(parsed) == np.count_nonzero(dense)
