"""Command-line pipeline: load a dataset pair, build composition matrices,
run flooding (or the classic baseline), and score the result.

All options can come from flags or a JSON config file; flags win. Every run
with --report-out also writes the fully resolved options next to the report
as <report>.config.json, so a result can be traced back to its exact setup.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from types import SimpleNamespace

import numpy as np

from . import classic_sf, composition, evaluation, flood, kg, text

DEFAULTS = {
    "dataset": None,
    "format": "openea",
    "fold": 1,
    "seed_fraction": None,
    "mode": "transflood",
    "max_iter": 20,
    "epsilon": 1e-4,
    "reinject_seeds": False,
    "gamma": 0.5,
    "name_vectors": None,
    "relation_map": None,
    "save_omega": None,
    "load_omega": None,
    "report_out": None,
    "workers": 1,
    "candidates": "test",
    "block_height": flood.DEFAULT_BLOCK_HEIGHT,
    "side": 1,
    "out": None,
}

FORMATS = ("openea", "dbp15k")
MODES = ("transflood", "gcnflood", "classic-sf")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgflood",
        description="Learning-free entity alignment for knowledge-graph pairs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--dataset", help="dataset directory")
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--fold", type=int, help="OpenEA split fold (default 1)")
        p.add_argument("--seed-fraction", type=float, dest="seed_fraction",
                       help="re-split links in file order with this seed share")

    def add_run(p):
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--max-iter", type=int, dest="max_iter")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--reinject-seeds", action="store_true", default=None,
                       dest="reinject_seeds")
        p.add_argument("--gamma", type=float,
                       help="scale of the name-similarity start matrix")
        p.add_argument("--name-vectors", dest="name_vectors",
                       help="entity name vector file")
        p.add_argument("--relation-map", dest="relation_map",
                       help="relation label mapping file (classic-sf)")
        p.add_argument("--workers", type=int)
        p.add_argument("--block-height", type=int, dest="block_height")

    p_flood = sub.add_parser("flood", help="run the full alignment pipeline")
    add_common(p_flood)
    add_run(p_flood)
    p_flood.add_argument("--save-omega", dest="save_omega",
                         help="write the final similarity checkpoint here")
    p_flood.add_argument("--report-out", dest="report_out")
    p_flood.add_argument("--candidates", choices=("test", "all"))
    p_flood.set_defaults(func=cmd_flood)

    p_eval = sub.add_parser("eval", help="score a saved similarity checkpoint")
    add_common(p_eval)
    p_eval.add_argument("--load-omega", dest="load_omega",
                        help="similarity checkpoint to score")
    p_eval.add_argument("--report-out", dest="report_out")
    p_eval.add_argument("--candidates", choices=("test", "all"))
    p_eval.set_defaults(func=cmd_eval)

    p_dump = sub.add_parser(
        "lambda-dump",
        help="write explicit composition coefficients (small graphs only)",
    )
    add_common(p_dump)
    p_dump.add_argument("--mode", choices=("transflood", "gcnflood"))
    p_dump.add_argument("--side", type=int, choices=(1, 2),
                        help="which graph of the pair (default 1)")
    p_dump.add_argument("--out", help="output file (default stdout)")
    p_dump.set_defaults(func=cmd_lambda_dump)

    p_bench = sub.add_parser("bench", help="per-stage timing breakdown")
    add_common(p_bench)
    add_run(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def resolve_config(args: argparse.Namespace) -> SimpleNamespace:
    """DEFAULTS, overlaid by the config file, overlaid by explicit flags."""
    resolved = dict(DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, encoding="utf-8") as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ValueError(f"{config_path}: config must be a JSON object")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ValueError(
                f"{config_path}: unknown config keys: {', '.join(unknown)}"
            )
        resolved.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    _validate(resolved)
    resolved["command"] = args.command
    return SimpleNamespace(**resolved)


def _validate(cfg: dict) -> None:
    if cfg["format"] not in FORMATS:
        raise ValueError(f"unknown format {cfg['format']!r}")
    if cfg["mode"] not in MODES:
        raise ValueError(f"unknown mode {cfg['mode']!r}")
    if cfg["candidates"] not in ("test", "all"):
        raise ValueError(f"unknown candidate pool {cfg['candidates']!r}")
    if int(cfg["max_iter"]) < 1:
        raise ValueError("max-iter must be >= 1")
    if not float(cfg["epsilon"]) > 0:
        raise ValueError("epsilon must be > 0")
    if not 0.0 <= float(cfg["gamma"]) <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    if int(cfg["workers"]) < 1:
        raise ValueError("workers must be >= 1")
    if int(cfg["block_height"]) < 1:
        raise ValueError("block-height must be >= 1")
    if cfg["seed_fraction"] is not None and not 0 < float(cfg["seed_fraction"]) < 1:
        raise ValueError("seed-fraction must be in (0, 1)")


def _load_dataset(cfg) -> kg.DatasetPair:
    if not cfg.dataset:
        raise ValueError("--dataset is required")
    return kg.load_dataset(cfg.dataset, cfg.format, fold=cfg.fold,
                           seed_fraction=cfg.seed_fraction)


def _build_compositions(pair: kg.DatasetPair, mode: str):
    builder = {
        "transflood": composition.transe_composition,
        "gcnflood": composition.gcn_composition,
    }[mode]
    return builder(pair.kg1), builder(pair.kg2)


def _text_base(cfg, pair: kg.DatasetPair):
    if not cfg.name_vectors:
        return None
    table1 = text.load_name_vectors(cfg.name_vectors, pair.kg1)
    table2 = text.load_name_vectors(cfg.name_vectors, pair.kg2)
    sim = text.name_similarity(table1, table2, block_height=cfg.block_height)
    return text.fuse(sim, pair.alignment.seed, cfg.gamma)


def _run_pipeline(cfg, pair: kg.DatasetPair) -> flood.FloodResult:
    config = flood.FloodConfig(
        max_iterations=cfg.max_iter,
        epsilon=cfg.epsilon,
        reinject_seeds=cfg.reinject_seeds,
        block_height=cfg.block_height,
    )
    base = _text_base(cfg, pair)
    if cfg.mode == "classic-sf":
        relmap = (
            classic_sf.read_relation_map(cfg.relation_map)
            if cfg.relation_map else None
        )
        pcg = classic_sf.build_pcg(pair.kg1, pair.kg2, relmap,
                                   seeds=pair.alignment.seed)
        start = flood.init_similarity(
            pair.kg1.num_entities, pair.kg2.num_entities,
            seeds=pair.alignment.seed, base=base,
            block_height=cfg.block_height,
        )
        return classic_sf.sf_fixpoint(pcg, start, config)
    comp1, comp2 = _build_compositions(pair, cfg.mode)
    return flood.run_flood(comp1, comp2, pair.alignment.seed, config,
                           base=base, workers=cfg.workers)


def _evaluate(cfg, pair: kg.DatasetPair,
              sim: flood.SimilarityMatrix) -> evaluation.RankingReport:
    if not pair.alignment.test:
        raise ValueError("dataset has no test pairs to evaluate")
    candidate_ids = (
        np.arange(pair.kg2.num_entities) if cfg.candidates == "all" else None
    )
    return evaluation.rank_targets(sim, pair.alignment.test, candidate_ids)


def _emit(cfg, pair: kg.DatasetPair, report: evaluation.RankingReport,
          run_lines: dict) -> None:
    summary = report.summary()
    for key, value in run_lines.items():
        print(f"{key}\t{value}")
    for key in ("hits@1", "hits@10", "mrr"):
        print(f"{key}\t{summary[key]:.6f}")
    print(f"pairs\t{summary['pairs']}")
    print(f"candidates\t{summary['candidates']}")
    if cfg.report_out:
        evaluation.write_report(
            report, cfg.report_out,
            pair.kg1.entity_labels, pair.kg2.entity_labels,
        )
        echo = {k: v for k, v in vars(cfg).items()}
        with open(f"{cfg.report_out}.config.json", "w", encoding="utf-8") as f:
            json.dump(echo, f, indent=2, sort_keys=True)
            f.write("\n")


def cmd_flood(cfg) -> int:
    pair = _load_dataset(cfg)
    result = _run_pipeline(cfg, pair)
    if cfg.save_omega:
        flood.save_checkpoint(result.similarity, cfg.save_omega,
                              iteration=result.iterations)
    report = _evaluate(cfg, pair, result.similarity)
    _emit(cfg, pair, report, {
        "mode": cfg.mode,
        "iterations": result.iterations,
        "converged": str(result.converged).lower(),
    })
    return 0


def cmd_eval(cfg) -> int:
    if not cfg.load_omega:
        raise ValueError("--load-omega is required")
    pair = _load_dataset(cfg)
    sim, iteration = flood.load_checkpoint(cfg.load_omega)
    expected = (pair.kg1.num_entities, pair.kg2.num_entities)
    if sim.values.shape != expected:
        raise ValueError(
            f"checkpoint shape {sim.values.shape} does not match the "
            f"dataset entity counts {expected}"
        )
    report = _evaluate(cfg, pair, sim)
    _emit(cfg, pair, report, {"checkpoint_iteration": iteration})
    return 0


def cmd_lambda_dump(cfg) -> int:
    pair = _load_dataset(cfg)
    graph = pair.kg1 if cfg.side == 1 else pair.kg2
    if graph.num_entities > 5000:
        raise ValueError(
            "explicit coefficient dump is limited to graphs with at most "
            "5000 entities"
        )
    if cfg.mode == "classic-sf":
        raise ValueError("classic-sf has no composition matrix to dump")
    builder = (
        composition.transe_composition
        if cfg.mode == "transflood" else composition.gcn_composition
    )
    comp = builder(graph)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as f:
            comp.dump(f)
    else:
        comp.dump(sys.stdout)
    return 0


def cmd_bench(cfg) -> int:
    total_start = time.perf_counter()
    t0 = time.perf_counter()
    pair = _load_dataset(cfg)
    t_load = time.perf_counter() - t0

    config = flood.FloodConfig(
        max_iterations=cfg.max_iter,
        epsilon=cfg.epsilon,
        reinject_seeds=cfg.reinject_seeds,
        block_height=cfg.block_height,
    )
    if cfg.mode == "classic-sf":
        t0 = time.perf_counter()
        relmap = (
            classic_sf.read_relation_map(cfg.relation_map)
            if cfg.relation_map else None
        )
        pcg = classic_sf.build_pcg(pair.kg1, pair.kg2, relmap,
                                   seeds=pair.alignment.seed)
        t_lambda = time.perf_counter() - t0
        t0 = time.perf_counter()
        start = flood.init_similarity(
            pair.kg1.num_entities, pair.kg2.num_entities,
            seeds=pair.alignment.seed, block_height=cfg.block_height,
        )
        result = classic_sf.sf_fixpoint(pcg, start, config)
        t_flood = time.perf_counter() - t0
    else:
        t0 = time.perf_counter()
        comp1, comp2 = _build_compositions(pair, cfg.mode)
        t_lambda = time.perf_counter() - t0
        t0 = time.perf_counter()
        base = _text_base(cfg, pair)
        result = flood.run_flood(comp1, comp2, pair.alignment.seed, config,
                                 base=base, workers=cfg.workers)
        t_flood = time.perf_counter() - t0

    t0 = time.perf_counter()
    _evaluate(cfg, pair, result.similarity)
    t_eval = time.perf_counter() - t0
    total = time.perf_counter() - total_start

    print("stage\tseconds")
    for stage, seconds in (("load", t_load), ("lambda", t_lambda),
                           ("flood", t_flood), ("eval", t_eval),
                           ("total", total)):
        print(f"{stage}\t{seconds:.6f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(cfg)
    except (kg.DatasetError, flood.NumericError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
