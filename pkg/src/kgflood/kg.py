"""Knowledge-graph ingestion: interning, reverse augmentation, and count indexes.

A loaded graph is immutable. Every triplet (s, r, o) is mirrored by
(o, r_inv, s) so that all statistics can be computed over outgoing edges
only; relation ids 0..R-1 are the originals from the source file and
R..2R-1 their reverses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class DatasetError(Exception):
    """Base class for ingestion failures."""


class ParseError(DatasetError):
    """A line of an input file does not match the expected shape."""


class EmptyGraphError(DatasetError):
    """A triple file contained no triplets."""


class ResolutionError(DatasetError):
    """An entity label could not be resolved against a loaded graph."""


class ConsistencyError(DatasetError):
    """Alignment splits overlap or repeat an entity within a side."""


def _read_rows(path: Path, n_fields: int) -> list[tuple[str, ...]]:
    """Read a UTF-8 tab-separated file, requiring n_fields per non-empty line."""
    rows = []
    with open(path, encoding="utf-8", newline=None) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise ParseError(
                    f"{path}:{lineno}: expected {n_fields} tab-separated fields, "
                    f"got {len(fields)}"
                )
            rows.append(tuple(fields))
    return rows


class KnowledgeGraph:
    """One reverse-augmented KG with dense ids and cached count indexes.

    Attributes
    ----------
    entity_labels : list of original identifier strings; index == entity id
    relation_labels : originals followed by reverses; the reverse of
        relation k is k + num_original_relations, and vice versa
    triplets : (T, 3) int32 array of (subject, relation, object), deduped,
        reverse-closed, originals first in file order
    """

    def __init__(self, entity_labels, relation_labels, num_original_relations,
                 triplets):
        self.entity_labels: list[str] = entity_labels
        self.relation_labels: list[str] = relation_labels
        self.num_original_relations: int = num_original_relations
        self.triplets: np.ndarray = triplets
        self.entity_ids: dict[str, int] = {
            lab: i for i, lab in enumerate(entity_labels)
        }
        self.relation_ids: dict[str, int] = {
            lab: i for i, lab in enumerate(relation_labels)
        }
        self._build_indexes()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_label_triplets(cls, label_triplets, extra_entities=()):
        """Intern labels (file order), dedup, reverse-augment, and index.

        extra_entities are interned after all triplet entities; they end up
        with empty outgoing-triplet lists but remain addressable (needed for
        entities that occur only in alignment files).
        """
        if not label_triplets:
            raise EmptyGraphError("no triplets to build a graph from")
        ent_ids: dict[str, int] = {}
        rel_ids: dict[str, int] = {}
        rows = []
        seen = set()
        for s_lab, r_lab, o_lab in label_triplets:
            s = ent_ids.setdefault(s_lab, len(ent_ids))
            r = rel_ids.setdefault(r_lab, len(rel_ids))
            o = ent_ids.setdefault(o_lab, len(ent_ids))
            if (s, r, o) in seen:
                continue
            seen.add((s, r, o))
            rows.append((s, r, o))
        for lab in extra_entities:
            ent_ids.setdefault(lab, len(ent_ids))

        num_orig = len(rel_ids)
        triplets = np.empty((2 * len(rows), 3), dtype=np.int32)
        for i, (s, r, o) in enumerate(rows):
            triplets[i] = (s, r, o)
            triplets[len(rows) + i] = (o, r + num_orig, s)

        entity_labels = [None] * len(ent_ids)
        for lab, i in ent_ids.items():
            entity_labels[i] = lab
        relation_labels = [None] * (2 * num_orig)
        for lab, i in rel_ids.items():
            relation_labels[i] = lab
            relation_labels[i + num_orig] = lab + "^-1"
        return cls(entity_labels, relation_labels, num_orig, triplets)

    def _build_indexes(self):
        n = len(self.entity_labels)
        n_rel = len(self.relation_labels)
        subj = self.triplets[:, 0]
        rel = self.triplets[:, 1]
        obj = self.triplets[:, 2]

        # |T_e|: outgoing-triplet counts, and a CSR-style view of T_e
        self.out_degree = np.bincount(subj, minlength=n).astype(np.int64)
        order = np.argsort(subj, kind="stable")
        self.out_order = order.astype(np.int64)
        self.out_ptr = np.concatenate(([0], np.cumsum(self.out_degree)))

        # |T_r|
        self.triplet_count_by_relation = np.bincount(
            rel, minlength=n_rel
        ).astype(np.int64)

        ones = np.ones(len(self.triplets), dtype=np.int64)
        # |R(x_i, x_j)|: triplets are deduped, so the number of (i, *, j)
        # triplets equals the number of distinct connecting relations.
        self.pair_relation_count = sp.csr_matrix(
            (ones, (subj, obj)), shape=(n, n)
        )
        self.pair_relation_count.sum_duplicates()

        # |T_{e,r}|
        self.entity_relation_count = sp.csr_matrix(
            (ones, (subj, rel)), shape=(n, n_rel)
        )
        self.entity_relation_count.sum_duplicates()

        # |N(e)|: distinct objects reachable by one outgoing triplet
        self.neighbor_count = np.diff(self.pair_relation_count.indptr)

    # -- accessors ----------------------------------------------------------

    @property
    def num_entities(self) -> int:
        return len(self.entity_labels)

    @property
    def num_relations(self) -> int:
        """Relation count including reverses."""
        return len(self.relation_labels)

    @property
    def num_triplets(self) -> int:
        return len(self.triplets)

    def reverse_relation(self, r: int) -> int:
        k = self.num_original_relations
        return r + k if r < k else r - k

    def outgoing(self, entity: int) -> np.ndarray:
        """The (t, 3) slice of triplets with `entity` as subject (T_e)."""
        lo, hi = self.out_ptr[entity], self.out_ptr[entity + 1]
        return self.triplets[self.out_order[lo:hi]]

    def neighbors(self, entity: int) -> np.ndarray:
        """Distinct one-hop neighbors N(e) (includes e only on a self-loop)."""
        a = self.pair_relation_count
        return a.indices[a.indptr[entity]:a.indptr[entity + 1]]

    def resolve(self, label: str) -> int:
        try:
            return self.entity_ids[label]
        except KeyError:
            raise ResolutionError(f"unknown entity label: {label!r}") from None

    def stats(self) -> dict:
        degrees = self.out_degree
        hist = np.bincount(degrees)
        return {
            "entities": self.num_entities,
            "relations": self.num_relations,
            "triplets": self.num_triplets,
            "degree_histogram": hist.tolist(),
        }


# -- alignment sets ---------------------------------------------------------

SPLITS = ("seed", "valid", "test")


@dataclass
class AlignmentSet:
    """Seed/valid/test entity pairs, disjoint across splits on both sides."""

    seed: list[tuple[int, int]] = field(default_factory=list)
    valid: list[tuple[int, int]] = field(default_factory=list)
    test: list[tuple[int, int]] = field(default_factory=list)
    _seen_source: dict = field(default_factory=dict, repr=False)
    _seen_target: dict = field(default_factory=dict, repr=False)

    def add_pair(self, split: str, source: int, target: int) -> None:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        if source in self._seen_source:
            raise ConsistencyError(
                f"source entity {source} already present in "
                f"{self._seen_source[source]!r} split"
            )
        if target in self._seen_target:
            raise ConsistencyError(
                f"target entity {target} already present in "
                f"{self._seen_target[target]!r} split"
            )
        self._seen_source[source] = split
        self._seen_target[target] = split
        getattr(self, split).append((source, target))

    def pairs(self, split: str) -> list[tuple[int, int]]:
        return getattr(self, split)

    def __len__(self) -> int:
        return len(self.seed) + len(self.valid) + len(self.test)


def load_alignment(links_file, split, kg_source: KnowledgeGraph,
                   kg_target: KnowledgeGraph,
                   into: AlignmentSet | None = None) -> AlignmentSet:
    """Append the label pairs of `links_file` to the named split.

    Labels must resolve in the already-loaded graphs; unknown labels and
    cross-split repeats raise.
    """
    aset = into if into is not None else AlignmentSet()
    for s_lab, t_lab in _read_rows(Path(links_file), 2):
        aset.add_pair(split, kg_source.resolve(s_lab), kg_target.resolve(t_lab))
    return aset


# -- file loaders -----------------------------------------------------------

def load_kg(triple_file, format: str = "openea") -> KnowledgeGraph:
    """Load a single triple file into a reverse-augmented graph.

    openea: lines are label triples `s<TAB>r<TAB>o`.
    dbp15k: lines are numeric-id triples; ids are mapped to labels via the
    sibling mapping files (`triples_N` -> `ent_ids_N` / `rel_ids_N`).
    """
    path = Path(triple_file)
    if format == "openea":
        triples = _read_rows(path, 3)
    elif format == "dbp15k":
        suffix = path.name.rsplit("_", 1)[-1]
        ent_map = _read_id_map(path.parent / f"ent_ids_{suffix}")
        rel_map_file = path.parent / f"rel_ids_{suffix}"
        rel_map = _read_id_map(rel_map_file) if rel_map_file.exists() else {}
        triples = [
            (
                _mapped(ent_map, s, path, "entity"),
                rel_map.get(r, r),
                _mapped(ent_map, o, path, "entity"),
            )
            for s, r, o in _read_rows(path, 3)
        ]
    else:
        raise ValueError(f"unknown format {format!r}")
    if not triples:
        raise EmptyGraphError(f"{path}: no triplets found")
    return KnowledgeGraph.from_label_triplets(triples)


def _read_id_map(path: Path) -> dict[str, str]:
    return {i: lab for i, lab in _read_rows(path, 2)}


def _mapped(mapping: dict[str, str], key: str, path: Path, kind: str) -> str:
    try:
        return mapping[key]
    except KeyError:
        raise ResolutionError(f"{path}: unmapped {kind} id {key!r}") from None


@dataclass
class DatasetPair:
    """Two loaded graphs plus their alignment splits."""

    kg1: KnowledgeGraph
    kg2: KnowledgeGraph
    alignment: AlignmentSet


def load_openea(dataset_dir, fold: int = 1,
                seed_fraction: float | None = None) -> DatasetPair:
    """Load an OpenEA-layout directory.

    Expects `rel_triples_1`, `rel_triples_2`, `ent_links`, and
    `721_5fold/<fold>/{train,valid,test}_links`. With seed_fraction set,
    the fold files are ignored and `ent_links` is re-split in file order:
    the first ceil(f*N) pairs seed, the rest test.
    """
    d = Path(dataset_dir)
    t1 = _read_rows(d / "rel_triples_1", 3)
    t2 = _read_rows(d / "rel_triples_2", 3)
    links = _read_rows(d / "ent_links", 2)
    kg1 = _build_side(t1, (s for s, _ in links), d / "rel_triples_1")
    kg2 = _build_side(t2, (t for _, t in links), d / "rel_triples_2")

    aset = AlignmentSet()
    if seed_fraction is not None:
        _split_links(links, seed_fraction, kg1, kg2, aset)
    else:
        fold_dir = d / "721_5fold" / str(fold)
        load_alignment(fold_dir / "train_links", "seed", kg1, kg2, aset)
        valid = fold_dir / "valid_links"
        if valid.exists():
            load_alignment(valid, "valid", kg1, kg2, aset)
        load_alignment(fold_dir / "test_links", "test", kg1, kg2, aset)
    return DatasetPair(kg1, kg2, aset)


def load_dbp15k(dataset_dir, seed_fraction: float | None = None) -> DatasetPair:
    """Load a DBP15K-layout directory (id triples + id->label mapping files).

    Uses the dataset's fixed split (`sup_ent_ids` train / `ref_ent_ids`
    test) when present; otherwise splits `ill_ent_ids` in file order with
    seed_fraction (default 0.3).
    """
    d = Path(dataset_dir)
    maps = (_read_id_map(d / "ent_ids_1"), _read_id_map(d / "ent_ids_2"))
    rel_maps = []
    for i in (1, 2):
        p = d / f"rel_ids_{i}"
        rel_maps.append(_read_id_map(p) if p.exists() else {})
    sides = []
    sup = ref = ill = None
    if (d / "sup_ent_ids").exists() and (d / "ref_ent_ids").exists():
        sup = _read_rows(d / "sup_ent_ids", 2)
        ref = _read_rows(d / "ref_ent_ids", 2)
        all_links = sup + ref
    else:
        ill = _read_rows(d / "ill_ent_ids", 2)
        all_links = ill
    for side in (0, 1):
        p = d / f"triples_{side + 1}"
        triples = [
            (
                _mapped(maps[side], s, p, "entity"),
                rel_maps[side].get(r, r),
                _mapped(maps[side], o, p, "entity"),
            )
            for s, r, o in _read_rows(p, 3)
        ]
        link_labels = (
            _mapped(maps[side], pair[side], d, "entity") for pair in all_links
        )
        sides.append(_build_side(triples, link_labels, p))
    kg1, kg2 = sides

    def as_labels(pairs):
        return [
            (_mapped(maps[0], a, d, "entity"), _mapped(maps[1], b, d, "entity"))
            for a, b in pairs
        ]

    aset = AlignmentSet()
    if sup is not None:
        for s_lab, t_lab in as_labels(sup):
            aset.add_pair("seed", kg1.resolve(s_lab), kg2.resolve(t_lab))
        for s_lab, t_lab in as_labels(ref):
            aset.add_pair("test", kg1.resolve(s_lab), kg2.resolve(t_lab))
    else:
        frac = 0.3 if seed_fraction is None else seed_fraction
        _split_links(as_labels(ill), frac, kg1, kg2, aset)
    return DatasetPair(kg1, kg2, aset)


def load_dataset(dataset_dir, format: str, fold: int = 1,
                 seed_fraction: float | None = None) -> DatasetPair:
    if format == "openea":
        return load_openea(dataset_dir, fold=fold, seed_fraction=seed_fraction)
    if format == "dbp15k":
        return load_dbp15k(dataset_dir, seed_fraction=seed_fraction)
    raise ValueError(f"unknown format {format!r}")


def _build_side(triples, link_labels, path) -> KnowledgeGraph:
    if not triples:
        raise EmptyGraphError(f"{path}: no triplets found")
    in_triples = set()
    for s, _, o in triples:
        in_triples.add(s)
        in_triples.add(o)
    extra, seen = [], set()
    for lab in link_labels:
        if lab not in in_triples and lab not in seen:
            seen.add(lab)
            extra.append(lab)
    if extra:
        logger.info("%s: %d entities appear only in link files", path, len(extra))
    return KnowledgeGraph.from_label_triplets(triples, extra_entities=extra)


def _split_links(label_pairs, fraction, kg1, kg2, aset) -> None:
    if not 0.0 < fraction < 1.0:
        raise ValueError("seed fraction must be in (0, 1)")
    n_seed = int(np.ceil(fraction * len(label_pairs)))
    for i, (s_lab, t_lab) in enumerate(label_pairs):
        split = "seed" if i < n_seed else "test"
        aset.add_pair(split, kg1.resolve(s_lab), kg2.resolve(t_lab))
