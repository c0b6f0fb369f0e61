"""Regenerate the bundled fixture dataset under data/fixture.

Two ~30-entity graphs: the second is an entity-relabeled copy of the first
plus a handful of noise edges, so alignment is solvable but not trivial.
Relation labels are shared between the sides (the classic baseline needs
label overlap). Layout follows the OpenEA convention. The golden similarity
checkpoint is produced by the engine and cross-checked against the
brute-force dense reference before being written; regeneration fails if the
two drift apart.

Run from the repository root: python3 tools/make_fixture.py
"""

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

from kgflood import (  # noqa: E402
    FloodConfig,
    load_openea,
    run_flood,
    save_checkpoint,
    transe_composition,
)

NUM_ENTITIES = 30
NUM_RELATIONS = 4
EXTRA_TRIPLES = 40
NOISE_TRIPLES = 8
DIM = 8
SEED = 20230701

TRAIN, VALID = 6, 3  # of 30 links; the rest is test


def ent1(i):
    return f"http://kg1.example.org/resource/n{i:02d}"


def ent2(i):
    return f"http://kg2.example.org/resource/m{i:02d}"


def rel(k):
    return f"http://schema.example.org/p{k}"


def build_kg1(rng):
    triples = []
    for i in range(1, NUM_ENTITIES):
        parent = int(rng.integers(0, i))
        triples.append((ent1(parent), rel(int(rng.integers(NUM_RELATIONS))),
                        ent1(i)))
    for _ in range(EXTRA_TRIPLES):
        s, o = rng.integers(NUM_ENTITIES, size=2)
        triples.append((ent1(int(s)), rel(int(rng.integers(NUM_RELATIONS))),
                        ent1(int(o))))
    return triples


def main():
    rng = np.random.default_rng(SEED)
    out = ROOT / "data" / "fixture"
    fold = out / "721_5fold" / "1"
    fold.mkdir(parents=True, exist_ok=True)
    (out / "golden").mkdir(exist_ok=True)

    triples1 = build_kg1(rng)
    perm = rng.permutation(NUM_ENTITIES)
    rename = {ent1(i): ent2(int(perm[i])) for i in range(NUM_ENTITIES)}
    triples2 = [(rename[s], r, rename[o]) for s, r, o in triples1]
    for _ in range(NOISE_TRIPLES):
        s, o = rng.integers(NUM_ENTITIES, size=2)
        triples2.append((ent2(int(s)), rel(int(rng.integers(NUM_RELATIONS))),
                         ent2(int(o))))

    links = [(ent1(i), rename[ent1(i)]) for i in range(NUM_ENTITIES)]
    link_order = rng.permutation(NUM_ENTITIES)
    links = [links[int(i)] for i in link_order]

    def write_rows(path, rows):
        path.write_text(
            "".join("\t".join(row) + "\n" for row in rows), encoding="utf-8"
        )

    write_rows(out / "rel_triples_1", triples1)
    write_rows(out / "rel_triples_2", triples2)
    write_rows(out / "ent_links", links)
    write_rows(fold / "train_links", links[:TRAIN])
    write_rows(fold / "valid_links", links[TRAIN:TRAIN + VALID])
    write_rows(fold / "test_links", links[TRAIN + VALID:])

    # name vectors: counterparts share a base vector, a few entities have none
    base = rng.normal(size=(NUM_ENTITIES, DIM))
    missing1 = set(int(i) for i in rng.choice(NUM_ENTITIES, 3, replace=False))
    missing2 = set(int(i) for i in rng.choice(NUM_ENTITIES, 3, replace=False))
    rows = []
    for i in range(NUM_ENTITIES):
        if i not in missing1:
            vec = base[i] + 0.05 * rng.normal(size=DIM)
            rows.append([ent1(i)] + [f"{x:.6f}" for x in vec])
        if i not in missing2:
            vec = base[i] + 0.05 * rng.normal(size=DIM)
            rows.append([rename[ent1(i)]] + [f"{x:.6f}" for x in vec])
    write_rows(out / "name_vectors.tsv", rows)

    # golden checkpoint: default translation-variant run, cross-checked
    pair = load_openea(out, fold=1)
    comp1 = transe_composition(pair.kg1)
    comp2 = transe_composition(pair.kg2)
    config = FloodConfig()
    result = run_flood(comp1, comp2, pair.alignment.seed, config)

    ref_l1 = oracles.transe_rows_formula(triples1, pair.kg1.entity_labels)
    ref_l2 = oracles.transe_rows_formula(triples2, pair.kg2.entity_labels)
    start = np.zeros((pair.kg1.num_entities, pair.kg2.num_entities),
                     dtype=np.float32)
    for i, j in pair.alignment.seed:
        start[i, j] = 1.0
    ref = oracles.dense_flood(ref_l1, ref_l2, start, result.iterations)
    drift = float(np.max(np.abs(result.similarity.values - ref)))
    if drift > 1e-6:
        raise SystemExit(f"engine drifted {drift:.2e} from the dense reference")

    save_checkpoint(result.similarity, out / "golden" / "transflood.omega",
                    iteration=result.iterations)
    print(f"fixture written to {out}")
    print(f"golden run: iterations={result.iterations} "
          f"converged={result.converged} oracle-drift={drift:.2e}")


if __name__ == "__main__":
    main()
