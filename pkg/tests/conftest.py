from pathlib import Path

import pytest

from kgflood import KnowledgeGraph

ROOT = Path(__file__).resolve().parent.parent

CHAIN = [("a", "r", "b"), ("b", "r", "c")]

# hand-expanded coefficients of the two-edge chain after reverse closure
CHAIN_TRANSE = {
    ("a", "a"): 0.5, ("a", "b"): 1.0, ("a", "c"): -0.5,
    ("b", "a"): 0.5, ("b", "b"): 0.0, ("b", "c"): 0.5,
    ("c", "a"): -0.5, ("c", "b"): 1.0, ("c", "c"): 0.5,
}
CHAIN_GCN = {
    ("a", "b"): 1.0,
    ("b", "a"): 0.5, ("b", "c"): 0.5,
    ("c", "b"): 1.0,
}


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    path = ROOT / "data" / "fixture"
    assert path.is_dir(), "bundled fixture dataset missing"
    return path


@pytest.fixture
def chain_kg() -> KnowledgeGraph:
    return KnowledgeGraph.from_label_triplets(CHAIN)


def write_rows(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join("\t".join(str(x) for x in row) + "\n" for row in rows),
        encoding="utf-8",
    )


@pytest.fixture
def make_openea(tmp_path):
    """Write a minimal OpenEA-layout dataset and return its directory."""

    def make(triples1, triples2, links, n_train, n_valid, name="ds"):
        d = tmp_path / name
        write_rows(d / "rel_triples_1", triples1)
        write_rows(d / "rel_triples_2", triples2)
        write_rows(d / "ent_links", links)
        fold = d / "721_5fold" / "1"
        write_rows(fold / "train_links", links[:n_train])
        write_rows(fold / "valid_links", links[n_train:n_train + n_valid])
        write_rows(fold / "test_links", links[n_train + n_valid:])
        return d

    return make
