"""Similarity fixpoint engine.

Iterates sim_t = normalize(C1 @ sim_{t-1} @ C2.T) from a seeded start, where
C1/C2 are the per-KG composition matrices. Entries are stored as float32 in
fixed row blocks; every multiplication accumulates in float64 and the result
is quantized back to float32 before normalization, so a run is reproducible
bit for bit regardless of the worker count (block boundaries depend only on
block_height, and the only cross-block reduction is an exact max).
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .composition import CompositionMatrix

__all__ = [
    "NumericError",
    "FloodConfig",
    "SimilarityMatrix",
    "FloodResult",
    "init_similarity",
    "normalize",
    "delta",
    "flood_step",
    "run_flood",
    "save_checkpoint",
    "load_checkpoint",
]

DEFAULT_BLOCK_HEIGHT = 1024

_CHECKPOINT_HEADER = struct.Struct("<4i")


class NumericError(RuntimeError):
    """A similarity matrix left the representable range (inf/nan)."""


@dataclass
class FloodConfig:
    max_iterations: int = 20
    epsilon: float = 1e-4
    reinject_seeds: bool = False
    normalization: str = "global-max-abs"
    block_height: int = DEFAULT_BLOCK_HEIGHT

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be an integer >= 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.normalization != "global-max-abs":
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.block_height < 1:
            raise ValueError("block_height must be >= 1")


class SimilarityMatrix:
    """Dense float32 source-by-target similarity values in row blocks.

    `columns`, when set, restricts the stored columns to the given sorted
    target entity ids; entry (i, columns[c]) lives at [i, c]. Restricted
    matrices trade exactness for memory and cannot be checkpointed.
    """

    def __init__(self, values, block_height=DEFAULT_BLOCK_HEIGHT, columns=None):
        self.values = np.ascontiguousarray(values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("similarity values must be 2-dimensional")
        if block_height < 1:
            raise ValueError("block_height must be >= 1")
        self.block_height = int(block_height)
        if columns is not None:
            columns = np.asarray(columns, dtype=np.int64)
            if len(np.unique(columns)) != len(columns):
                raise ValueError("restricted columns must be unique")
            columns = np.sort(columns)
            if columns.size != self.values.shape[1]:
                raise ValueError("column list length differs from value width")
        self.columns = columns

    @property
    def shape(self):
        return self.values.shape

    def block_ranges(self):
        n = self.values.shape[0]
        h = self.block_height
        return [(lo, min(lo + h, n)) for lo in range(0, n, h)]

    def column_position(self, target: int) -> int:
        """Stored column of a target entity id."""
        if self.columns is None:
            if not 0 <= target < self.values.shape[1]:
                raise IndexError(f"target id {target} outside similarity matrix")
            return target
        pos = int(np.searchsorted(self.columns, target))
        if pos == len(self.columns) or self.columns[pos] != target:
            raise IndexError(f"target id {target} not in restricted columns")
        return pos

    def copy(self) -> "SimilarityMatrix":
        return SimilarityMatrix(
            self.values.copy(), self.block_height, self.columns
        )

    def to_array(self) -> np.ndarray:
        return self.values


@dataclass
class FloodResult:
    similarity: SimilarityMatrix
    iterations: int
    converged: bool


def _seed_cells(sim: SimilarityMatrix, seeds):
    pairs = list(seeds) if seeds is not None else []
    if not pairs:
        return None
    rows = np.empty(len(pairs), dtype=np.int64)
    cols = np.empty(len(pairs), dtype=np.int64)
    n = sim.values.shape[0]
    for idx, (i, j) in enumerate(pairs):
        if not 0 <= i < n:
            raise IndexError(f"source id {i} outside similarity matrix")
        rows[idx] = i
        cols[idx] = sim.column_position(j)
    return rows, cols


def init_similarity(n, m, seeds=None, base=None,
                    block_height=DEFAULT_BLOCK_HEIGHT,
                    columns=None) -> SimilarityMatrix:
    """Seed-pair entries set to 1 on top of `base` (or a zero matrix)."""
    if columns is not None:
        columns = np.sort(np.asarray(columns, dtype=np.int64))
        if columns.size and (columns[0] < 0 or columns[-1] >= m):
            raise IndexError("restricted column outside target range")
        width = columns.size
    else:
        width = m
    if base is not None:
        base_values = base.values if isinstance(base, SimilarityMatrix) else base
        base_values = np.asarray(base_values)
        if base_values.shape != (n, width):
            raise ValueError(
                f"base shape {base_values.shape} does not match ({n}, {width})"
            )
        if isinstance(base, SimilarityMatrix):
            base_cols = base.columns
            if (base_cols is None) != (columns is None) or (
                base_cols is not None and not np.array_equal(base_cols, columns)
            ):
                raise ValueError("base column restriction differs")
        values = base_values.astype(np.float32, copy=True)
    else:
        values = np.zeros((n, width), dtype=np.float32)
    sim = SimilarityMatrix(values, block_height, columns)
    cells = _seed_cells(sim, seeds)
    if cells is not None:
        sim.values[cells] = 1.0
    return sim


def _combine_block_maxes(maxes) -> float:
    if not maxes:
        return 0.0
    return float(np.max(np.asarray(maxes, dtype=np.float64)))


def _normalize_values(values: np.ndarray, block_height: int) -> None:
    if values.size == 0:
        return
    maxes = [
        float(np.max(np.abs(values[lo:lo + block_height])))
        for lo in range(0, values.shape[0], block_height)
    ]
    scale = _combine_block_maxes(maxes)
    if not np.isfinite(scale):
        raise NumericError(
            "similarity values are not finite; the composition matrices "
            "may be ill-conditioned for this graph pair"
        )
    if scale not in (0.0, 1.0):
        values /= np.float32(scale)


def normalize(sim: SimilarityMatrix) -> SimilarityMatrix:
    """Divide all entries by the largest absolute entry, in place."""
    _normalize_values(sim.values, sim.block_height)
    return sim


def delta(a: SimilarityMatrix, b: SimilarityMatrix) -> float:
    """Largest elementwise absolute difference."""
    av, bv = a.values, b.values
    if av.shape != bv.shape:
        raise ValueError(f"shape mismatch: {av.shape} vs {bv.shape}")
    if av.size == 0:
        return 0.0
    h = a.block_height
    maxes = [
        float(np.max(np.abs(av[lo:lo + h] - bv[lo:lo + h])))
        for lo in range(0, av.shape[0], h)
    ]
    return _combine_block_maxes(maxes)


class _TransposedFactors:
    """Right-hand composition factors pre-transposed for dense @ sparse."""

    def __init__(self, comp: CompositionMatrix):
        self.direct_t = comp.direct.T
        if comp.usage is not None:
            self.usage_t = comp.usage.T
            self.imbalance_t = comp.imbalance.T
        else:
            self.usage_t = self.imbalance_t = None


def _step_into(src: CompositionMatrix, dst_t: _TransposedFactors,
               cur: np.ndarray, out: np.ndarray, cells, base_values,
               block_height: int, workers: int) -> None:
    """out <- raw (un-normalized) next iterate, float32-quantized."""
    if src.usage is not None:
        shared_vw = src.imbalance @ cur
    else:
        shared_vw = None

    def compute(lo):
        hi = min(lo + block_height, cur.shape[0])
        q = src.direct[lo:hi] @ cur
        if shared_vw is not None:
            q += src.usage[lo:hi] @ shared_vw
        t = q @ dst_t.direct_t
        if dst_t.usage_t is not None:
            t += (q @ dst_t.imbalance_t) @ dst_t.usage_t
        if base_values is not None:
            t += base_values[lo:hi]
        if cells is not None:
            rows, cols = cells
            inside = (rows >= lo) & (rows < hi)
            t[rows[inside] - lo, cols[inside]] = 1.0
        out[lo:hi] = t

    starts = list(range(0, cur.shape[0], block_height))
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(compute, starts))
    else:
        for lo in starts:
            compute(lo)


def _resolve_target(src, dst, sim):
    if src.n != sim.values.shape[0]:
        raise ValueError(
            f"source composition is {src.n}x{src.n} but similarity has "
            f"{sim.values.shape[0]} rows"
        )
    dst_eff = dst.submatrix(sim.columns) if sim.columns is not None else dst
    if dst_eff.n != sim.values.shape[1]:
        raise ValueError(
            f"target composition is {dst_eff.n}x{dst_eff.n} but similarity "
            f"has {sim.values.shape[1]} columns"
        )
    return dst_eff


def flood_step(src: CompositionMatrix, sim: SimilarityMatrix,
               dst: CompositionMatrix, config: FloodConfig | None = None,
               seeds=None, base=None, workers: int = 1) -> SimilarityMatrix:
    """One normalized update; seeds/base apply only with reinject_seeds."""
    config = config or FloodConfig()
    dst_eff = _resolve_target(src, dst, sim)
    cells = base_values = None
    if config.reinject_seeds:
        cells = _seed_cells(sim, seeds)
        if base is not None:
            base_values = base.values if isinstance(base, SimilarityMatrix) else base
    out = SimilarityMatrix(
        np.zeros_like(sim.values), sim.block_height, sim.columns
    )
    _step_into(src, _TransposedFactors(dst_eff), sim.values, out.values,
               cells, base_values, sim.block_height, workers)
    _normalize_values(out.values, out.block_height)
    return out


def run_flood(src: CompositionMatrix, dst: CompositionMatrix, seeds,
              config: FloodConfig | None = None, base=None,
              workers: int = 1, columns=None) -> FloodResult:
    """Iterate from the seeded start until the update shifts no entry by
    epsilon or more, or max_iterations is hit."""
    config = config or FloodConfig()
    cur = init_similarity(src.n, dst.n, seeds=seeds, base=base,
                          block_height=config.block_height, columns=columns)
    dst_eff = _resolve_target(src, dst, cur)
    dst_t = _TransposedFactors(dst_eff)
    cells = base_values = None
    if config.reinject_seeds:
        cells = _seed_cells(cur, seeds)
        if base is not None:
            base_values = base.values if isinstance(base, SimilarityMatrix) else base
            base_values = np.asarray(base_values, dtype=np.float32)
    scratch = np.zeros_like(cur.values)
    iterations = 0
    converged = False
    for t in range(1, config.max_iterations + 1):
        _step_into(src, dst_t, cur.values, scratch, cells, base_values,
                   config.block_height, workers)
        _normalize_values(scratch, config.block_height)
        cur.values, scratch = scratch, cur.values
        iterations = t
        d = _max_abs_diff(cur.values, scratch, config.block_height)
        if d < config.epsilon:
            converged = True
            break
    return FloodResult(cur, iterations, converged)


def _max_abs_diff(a: np.ndarray, b: np.ndarray, block_height: int) -> float:
    if a.size == 0:
        return 0.0
    maxes = [
        float(np.max(np.abs(a[lo:lo + block_height] - b[lo:lo + block_height])))
        for lo in range(0, a.shape[0], block_height)
    ]
    return _combine_block_maxes(maxes)


def save_checkpoint(sim: SimilarityMatrix, path, iteration: int = 0) -> None:
    """Binary layout: little-endian int32 (rows, cols, block_height,
    iteration) followed by the row-major float32 values."""
    if sim.columns is not None:
        raise ValueError(
            "column-restricted similarity matrices cannot be checkpointed"
        )
    n, m = sim.values.shape
    with open(path, "wb") as f:
        f.write(_CHECKPOINT_HEADER.pack(n, m, sim.block_height, iteration))
        f.write(np.ascontiguousarray(sim.values, dtype="<f4").tobytes())


def load_checkpoint(path):
    """Returns (SimilarityMatrix, iteration)."""
    raw = Path(path).read_bytes()
    if len(raw) < _CHECKPOINT_HEADER.size:
        raise ValueError(f"{path}: truncated checkpoint header")
    n, m, block_height, iteration = _CHECKPOINT_HEADER.unpack_from(raw)
    if n < 0 or m < 0 or block_height < 1 or iteration < 0:
        raise ValueError(f"{path}: corrupt checkpoint header")
    expected = _CHECKPOINT_HEADER.size + 4 * n * m
    if len(raw) != expected:
        raise ValueError(
            f"{path}: checkpoint is {len(raw)} bytes, expected {expected}"
        )
    values = np.frombuffer(
        raw, dtype="<f4", offset=_CHECKPOINT_HEADER.size
    ).reshape(n, m).astype(np.float32, copy=True)
    return SimilarityMatrix(values, block_height), iteration
