"""Staged pipeline with content-hash cached artifacts.

Stages run in dependency order kg -> kge -> graph -> train -> eval. Each
stage writes its artifacts plus a ``<stage>.stamp`` JSON recording the
SHA-256 of every input file and the relevant configuration subset; when
the recomputed stamp matches and the artifacts exist, the stage is skipped
and the artifacts on disk are left byte-identical.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .config import PipelineConfig
from .gnn import load_checkpoint, save_checkpoint
from .kg import builtin_kg_paths, load_kg
from .kge import load_embeddings, save_embeddings, train_embeddings
from .linker import build_gazetteer
from .newsgraph import build_news_graph, load_corpus, load_graphs, save_graphs
from .plots import plot_loss_curve
from .textfeat import fit_tfidf, load_external_vectors
from .train import evaluate, fit, split_indices

log = logging.getLogger("stancegraph")

STAGES = ("kg", "kge", "graph", "train", "eval")

_STAGE_DEPENDENCIES = {
    "graph": [("embeddings.tsv", "kge")],
    "train": [("graphs.bin", "graph")],
    "eval": [("graphs.bin", "graph"), ("model.ckpt", "train")],
}


class PipelineError(RuntimeError):
    pass


class MissingArtifactError(PipelineError):
    def __init__(self, artifact: str, stage: str, producer: str):
        self.producer = producer
        super().__init__(
            f"stage {stage!r} needs artifact {artifact!r}; run stage {producer!r} first"
        )


@dataclass
class StageResult:
    name: str
    skipped: bool       # True on cache hit
    artifacts: list[str]


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _kg_paths(config: PipelineConfig) -> tuple[Path, Path]:
    if config.kg_triples and config.kg_entities:
        return Path(config.kg_triples), Path(config.kg_entities)
    return builtin_kg_paths()


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _config_subset(config: PipelineConfig, prefixes) -> dict:
    return {
        name: getattr(config, name)
        for name in vars(config)
        if any(name.startswith(p) or name == p for p in prefixes)
    }


class _Stage:
    def __init__(self, name, inputs: dict[str, Path], config_subset: dict, artifacts: list[Path]):
        self.name = name
        self.inputs = inputs
        self.config_subset = config_subset
        self.artifacts = artifacts

    def stamp(self) -> dict:
        return {
            "inputs": {label: _sha256(path) for label, path in sorted(self.inputs.items())},
            "config": self.config_subset,
        }

    def is_fresh(self, stamp_path: Path) -> bool:
        if not stamp_path.exists() or not all(p.exists() for p in self.artifacts):
            return False
        try:
            recorded = json.loads(stamp_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            return False
        return recorded == self.stamp()


def run_pipeline(
    config: PipelineConfig,
    stages=None,
    out_dir=None,
    model_path=None,
    embeddings_path=None,
) -> list[StageResult]:
    """Execute the requested stages (all by default) in dependency order."""
    requested = list(STAGES) if stages is None else list(stages)
    unknown = [s for s in requested if s not in STAGES]
    if unknown:
        raise PipelineError(f"unknown stages {unknown}; expected a subset of {STAGES}")
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    overrides = {"model_path": model_path, "embeddings_path": embeddings_path}

    results = []
    for stage in STAGES:
        if stage not in requested:
            continue
        for artifact, producer in _STAGE_DEPENDENCIES.get(stage, []):
            path = out / artifact
            if artifact == "model.ckpt" and model_path:
                path = Path(model_path)
            elif artifact == "embeddings.tsv" and embeddings_path:
                path = Path(embeddings_path)
            if producer not in requested and not path.exists():
                raise MissingArtifactError(artifact, stage, producer)
        runner = globals()[f"_run_{stage}"]
        results.append(runner(config, out, overrides))
    return results


def _finish(stage: _Stage, out: Path, build) -> StageResult:
    stamp_path = out / f"{stage.name}.stamp"
    if stage.is_fresh(stamp_path):
        log.info("stage %s: cache hit, skipping", stage.name)
        return StageResult(stage.name, True, [str(p) for p in stage.artifacts])
    log.info("stage %s: running", stage.name)
    build()
    _write_json(stamp_path, stage.stamp())
    return StageResult(stage.name, False, [str(p) for p in stage.artifacts])


def _run_kg(config: PipelineConfig, out: Path, _overrides) -> StageResult:
    triples, entities = _kg_paths(config)
    stage = _Stage(
        "kg", {"entities": entities, "triples": triples}, {}, [out / "kg_stats.json"]
    )

    def build():
        kg = load_kg(triples, entities)
        _write_json(out / "kg_stats.json", kg.stats())

    return _finish(stage, out, build)


def _run_kge(config: PipelineConfig, out: Path, _overrides) -> StageResult:
    triples, entities = _kg_paths(config)
    stage = _Stage(
        "kge",
        {"entities": entities, "triples": triples},
        _config_subset(config, ("kge_", "seed")),
        [out / "embeddings.tsv"],
    )

    def build():
        kg = load_kg(triples, entities)
        table = train_embeddings(kg, config.kge_config())
        save_embeddings(out / "embeddings.tsv", table, kg)

    return _finish(stage, out, build)


def _run_graph(config: PipelineConfig, out: Path, overrides) -> StageResult:
    if config.corpus is None:
        raise PipelineError("stage 'graph' requires the 'corpus' config field")
    triples, entities = _kg_paths(config)
    emb_path = (
        Path(overrides["embeddings_path"])
        if overrides.get("embeddings_path")
        else out / "embeddings.tsv"
    )
    inputs = {
        "entities": entities,
        "triples": triples,
        "embeddings": emb_path,
        "corpus": Path(config.corpus),
    }
    if config.aliases:
        inputs["aliases"] = Path(config.aliases)
    if config.vectors_file:
        inputs["vectors"] = Path(config.vectors_file)
    stage = _Stage(
        "graph",
        inputs,
        _config_subset(config, ("features", "text_dim")),
        [out / "graphs.bin"],
    )

    def build():
        kg = load_kg(triples, entities)
        table = load_embeddings(emb_path, kg, method=config.kge_method)
        gaz = build_gazetteer(kg, config.aliases)
        docs = load_corpus(config.corpus)
        if config.features == "external_file":
            tf = load_external_vectors(config.vectors_file)
        else:
            texts = [d.title for d in docs if d.title is not None]
            texts += [p for d in docs for p in d.paragraphs]
            tf = fit_tfidf(texts, dim=config.text_dim)
        graphs = [build_news_graph(d, gaz, tf, table) for d in docs]
        save_graphs(out / "graphs.bin", graphs, d_text=tf.dim, d_e=table.dim)

    return _finish(stage, out, build)


def _train_eval_split(config: PipelineConfig, graphs):
    labels = [g.label for g in graphs]
    strat = None if any(lb is None for lb in labels) else labels
    return split_indices(len(graphs), config.eval_fraction, seed=config.seed, labels=strat)


def _run_train(config: PipelineConfig, out: Path, _overrides) -> StageResult:
    stage = _Stage(
        "train",
        {"graphs": out / "graphs.bin"},
        _config_subset(
            config,
            ("variant", "layers", "hidden", "classes", "leaky_slope", "dropout",
             "learning_rate", "batch_size", "max_epochs", "l2_lambda",
             "eval_fraction", "seed"),
        ),
        [out / "model.ckpt", out / "loss_curve.csv", out / "loss_curve.png"],
    )

    def build():
        graphs, d_text, d_e = load_graphs(out / "graphs.bin")
        train_idx, _ = _train_eval_split(config, graphs)
        params, curve = fit(
            [graphs[i] for i in train_idx], config.train_config(), config.gnn_config()
        )
        save_checkpoint(out / "model.ckpt", params, config.gnn_config(), d_text, d_e)
        with open(out / "loss_curve.csv", "w", encoding="utf-8") as fh:
            fh.write("epoch,loss\n")
            for epoch, loss in enumerate(curve, start=1):
                fh.write(f"{epoch},{loss!r}\n")
        plot_loss_curve(curve, out / "loss_curve.png")

    return _finish(stage, out, build)


def _run_eval(config: PipelineConfig, out: Path, overrides) -> StageResult:
    ckpt = Path(overrides["model_path"]) if overrides.get("model_path") else out / "model.ckpt"
    stage = _Stage(
        "eval",
        {"graphs": out / "graphs.bin", "model": ckpt},
        _config_subset(config, ("eval_fraction", "seed")),
        [out / "metrics.json"],
    )

    def build():
        graphs, _, _ = load_graphs(out / "graphs.bin")
        params, gnn_config, _, _ = load_checkpoint(ckpt)
        _, eval_idx = _train_eval_split(config, graphs)
        metrics = evaluate(params, [graphs[i] for i in eval_idx], gnn_config)
        payload = metrics.to_dict()
        payload["n_eval_documents"] = len(eval_idx)
        _write_json(out / "metrics.json", payload)

    return _finish(stage, out, build)
