"""Ablation harness: knowledge-density, edge, embedding, and variant studies.

Each study runs the in-memory pipeline (KG transform -> embedding training
-> graph construction -> classifier training -> held-out evaluation) at
every grid point, five times by default with distinct seeds, and reports
per-run rows plus mean/std summaries. Artifacts unaffected by a grid point
(the fitted text provider, the gazetteer, embedding tables, base graphs)
are cached and reused across the grid.
"""

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .gnn import GnnConfig, VARIANTS
from .kg import KnowledgeGraph, drop_triples
from .kge import METHODS, KgeConfig, train_embeddings
from .linker import build_gazetteer, register_aliases
from .metrics import Metrics
from .newsgraph import (
    RELATIONS,
    NewsDocument,
    build_news_graph,
    drop_para_ent_edges,
    remove_edge_type,
)
from .textfeat import fit_tfidf
from .train import TrainConfig, evaluate, fit, split_indices

STUDIES = (
    "triple_density",
    "edge_density",
    "edge_type",
    "kge_method",
    "kge_epochs",
    "gnn_variant",
)

EDGE_TYPE_GRID = ("none",) + RELATIONS


@dataclass
class DeskConfigs:
    """Desk-scale defaults for the synthetic studies."""

    kge: KgeConfig = field(
        default_factory=lambda: KgeConfig(dim=16, epochs=100, learning_rate=0.05)
    )
    gnn: GnnConfig = field(
        default_factory=lambda: GnnConfig(hidden=64, layers=2, classes=2, dropout=0.5)
    )
    train: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=30))
    text_dim: int = 64
    eval_fraction: float = 0.2


@dataclass
class AblationResult:
    study: str
    rows: list[dict]     # grid_point, seed, accuracy, macro_f1
    summary: list[dict]  # grid_point, mean/std of both metrics


def _validate_grid(study: str, grid) -> list:
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}; expected one of {STUDIES}")
    if not grid:
        raise ValueError("empty grid")
    if study in ("triple_density", "edge_density"):
        points = [float(p) for p in grid]
        if any(not 0.0 <= p <= 1.0 for p in points):
            raise ValueError("density grid points must lie in [0, 1]")
        return points
    if study == "kge_epochs":
        points = [int(p) for p in grid]
        if any(p < 0 for p in points):
            raise ValueError("epoch grid points must be >= 0")
        return points
    if study == "edge_type":
        bad = [p for p in grid if p not in EDGE_TYPE_GRID]
    elif study == "kge_method":
        bad = [p for p in grid if p not in METHODS]
    else:
        bad = [p for p in grid if p not in VARIANTS]
    if bad:
        raise ValueError(f"invalid grid points for {study}: {bad}")
    return list(grid)


def run_pipeline_once(
    kg: KnowledgeGraph,
    gaz,
    tf,
    docs: list[NewsDocument],
    configs: DeskConfigs,
    seed: int,
    groups=None,
    graph_transform=None,
    kge_config: KgeConfig | None = None,
    gnn_config: GnnConfig | None = None,
    table=None,
    base_graphs=None,
) -> tuple[Metrics, list]:
    """One full train/eval run; returns metrics and the built graphs."""
    kge_config = kge_config or configs.kge
    gnn_config = gnn_config or configs.gnn
    if table is None:
        table = train_embeddings(kg, replace(kge_config, seed=seed))
    graphs = base_graphs
    if graphs is None:
        graphs = [build_news_graph(d, gaz, tf, table) for d in docs]
    if graph_transform is not None:
        graphs = [graph_transform(i, g) for i, g in enumerate(graphs)]
    labels = [d.label for d in docs]
    train_idx, eval_idx = split_indices(
        len(docs), configs.eval_fraction, seed=seed, labels=labels, groups=groups
    )
    train_config = replace(configs.train, seed=seed)
    params, _ = fit([graphs[i] for i in train_idx], train_config, gnn_config)
    metrics = evaluate(params, [graphs[i] for i in eval_idx], gnn_config)
    return metrics, graphs


def ablate(
    study: str,
    grid,
    kg: KnowledgeGraph,
    aliases: list[tuple[str, str]],
    docs: list[NewsDocument],
    configs: DeskConfigs | None = None,
    reps: int = 5,
    base_seed: int = 0,
    groups=None,
) -> AblationResult:
    configs = configs or DeskConfigs()
    grid = _validate_grid(study, grid)
    gaz = build_gazetteer(kg)
    register_aliases(gaz, kg, aliases)
    texts = [d.title for d in docs if d.title is not None]
    texts += [p for d in docs for p in d.paragraphs]
    tf = fit_tfidf(texts, dim=configs.text_dim)

    rows = []
    table_cache: dict[tuple, object] = {}
    graph_cache: dict[tuple, list] = {}
    for rep in range(reps):
        seed = base_seed + rep
        for point in grid:
            run_kg = kg
            kge_config = configs.kge
            gnn_config = configs.gnn
            graph_transform = None
            table_key = ("base", seed)
            if study == "triple_density":
                run_kg = drop_triples(kg, point, seed=seed)
                table_key = ("triples", point, seed)
            elif study == "kge_method":
                kge_config = replace(configs.kge, method=point)
                table_key = ("method", point, seed)
            elif study == "kge_epochs":
                kge_config = replace(configs.kge, epochs=point)
                table_key = ("epochs", point, seed)
            elif study == "edge_density":
                if point != 1.0:
                    graph_transform = lambda i, g, p=point, s=seed: drop_para_ent_edges(
                        g, p, seed=[s, i]
                    )
            elif study == "edge_type":
                if point != "none":
                    graph_transform = lambda i, g, p=point: remove_edge_type(g, p)
            elif study == "gnn_variant":
                gnn_config = replace(configs.gnn, variant=point)

            if table_key not in table_cache:
                table_cache[table_key] = train_embeddings(run_kg, replace(kge_config, seed=seed))
            table = table_cache[table_key]
            if table_key not in graph_cache:
                graph_cache[table_key] = [build_news_graph(d, gaz, tf, table) for d in docs]
            metrics, _ = run_pipeline_once(
                run_kg, gaz, tf, docs, configs, seed,
                groups=groups,
                graph_transform=graph_transform,
                kge_config=kge_config,
                gnn_config=gnn_config,
                table=table,
                base_graphs=graph_cache[table_key],
            )
            rows.append(
                {
                    "grid_point": str(point),
                    "seed": seed,
                    "accuracy": metrics.accuracy,
                    "macro_f1": metrics.macro_f1,
                }
            )
    summary = summarize(grid, rows)
    return AblationResult(study, rows, summary)


def summarize(grid, rows: list[dict]) -> list[dict]:
    summary = []
    for point in grid:
        point_rows = [r for r in rows if r["grid_point"] == str(point)]
        acc = np.array([r["accuracy"] for r in point_rows])
        maf = np.array([r["macro_f1"] for r in point_rows])
        summary.append(
            {
                "grid_point": str(point),
                "mean_accuracy": float(acc.mean()),
                "std_accuracy": float(acc.std()),
                "mean_macro_f1": float(maf.mean()),
                "std_macro_f1": float(maf.std()),
            }
        )
    return summary


def write_rows_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["grid_point", "seed", "accuracy", "macro_f1"])
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def write_summary_csv(path, summary: list[dict]) -> None:
    fields = ["grid_point", "mean_accuracy", "std_accuracy", "mean_macro_f1", "std_macro_f1"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in summary:
            writer.writerow(row)
