"""Command-line entry point wiring the full pipeline.

Subcommands: kg, kge, link, graph, train, eval, kfold, ablate, synth,
pipeline. Global flags --config/--out-dir/--seed; logs go to standard
error, artifacts to the output directory.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .ablate import (
    STUDIES,
    DeskConfigs,
    ablate,
    write_rows_csv,
    write_summary_csv,
)
from .config import ConfigError, PipelineConfig, validate_config
from .kg import (
    KgFormatError,
    bucket_score,
    builtin_kg_paths,
    drop_triples,
    load_kg,
    load_scorecard,
    save_kg,
)
from .kge import KgeConfig, L2, link_prediction_eval, load_embeddings, save_embeddings, train_embeddings
from .linker import (
    GazetteerError,
    build_gazetteer,
    link_entities,
    load_alias_pairs,
    write_mentions_tsv,
)
from .newsgraph import build_news_graph, load_corpus, save_corpus, save_graphs
from .pipeline import STAGES, PipelineError, run_pipeline
from .plots import plot_ablation, plot_fold_metrics
from .synth import SynthSpec, generate_synthetic_corpus, pair_group_of
from .textfeat import fit_tfidf, load_external_vectors
from .train import kfold as run_kfold

log = logging.getLogger("stancegraph")


def _add_kg_source(parser):
    parser.add_argument("--kg", help="directory holding entities.tsv and triples.tsv")
    parser.add_argument("--entities", help="entities TSV path")
    parser.add_argument("--triples", help="triples TSV path")
    parser.add_argument(
        "--builtin", action="store_true", help="use the bundled political KG"
    )


def _resolve_kg(args):
    if args.builtin:
        return builtin_kg_paths()
    if args.kg:
        base = Path(args.kg)
        return base / "triples.tsv", base / "entities.tsv"
    if args.entities and args.triples:
        return Path(args.triples), Path(args.entities)
    raise SystemExit("error: provide --kg DIR, --entities/--triples, or --builtin")


def _load_config(args) -> PipelineConfig:
    config = validate_config(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.out_dir is not None:
        config = replace(config, out_dir=str(args.out_dir))
    return config


def _out_dir(args, config=None) -> Path:
    if args.out_dir is not None:
        out = Path(args.out_dir)
    elif config is not None:
        out = Path(config.out_dir)
    else:
        out = Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stancegraph",
        description="Knowledge-graph-augmented political perspective detection toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"stancegraph {__version__}")
    parser.add_argument("--config", help="pipeline config file (flat key = value)")
    parser.add_argument("--out-dir", help="artifact output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p_kg = sub.add_parser("kg", help="knowledge graph store operations")
    kg_sub = p_kg.add_subparsers(dest="kg_command", required=True)
    for name, doc in (
        ("validate", "load and validate the KG files"),
        ("stats", "emit entity/relation/triple counts"),
    ):
        p = kg_sub.add_parser(name, help=doc)
        _add_kg_source(p)
    p = kg_sub.add_parser("bucket", help="bucket scorecard rows into stance triples")
    _add_kg_source(p)
    p.add_argument("--scorecard", required=True)
    p.add_argument("--out", help="output triples TSV (default: stdout)")
    p = kg_sub.add_parser("drop", help="uniformly sample a fraction of triples")
    _add_kg_source(p)
    p.add_argument("--keep", type=float, required=True)
    p.add_argument("--seed", dest="drop_seed", type=int, default=0)
    p.add_argument("--out", help="output triples TSV (default: stdout)")

    p_kge = sub.add_parser("kge", help="knowledge graph embedding training/eval")
    kge_sub = p_kge.add_subparsers(dest="kge_command", required=True)
    p = kge_sub.add_parser("train", help="train an embedding table")
    _add_kg_source(p)
    p.add_argument("--dim", type=int, default=200)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--margin", type=float, default=1.0)
    p.add_argument("--norm", choices=("L1", "L2"), default=L2)
    p.add_argument("--method", choices=("transe", "distmult"), default="transe")
    p.add_argument("--negatives", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--seed", dest="kge_seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output embedding TSV")
    p = kge_sub.add_parser("eval", help="filtered tail-prediction ranking")
    _add_kg_source(p)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--method", choices=("transe", "distmult"), default="transe")
    p.add_argument("--k", type=int, default=1)

    p_link = sub.add_parser("link", help="gazetteer entity linking")
    link_sub = p_link.add_subparsers(dest="link_command", required=True)
    p = link_sub.add_parser("run", help="emit mention TSV for a corpus file")
    _add_kg_source(p)
    p.add_argument("--doc", required=True, help="corpus JSONL path")
    p.add_argument("--aliases")
    p.add_argument("--out", help="output mentions TSV (default: stdout)")

    p_graph = sub.add_parser("graph", help="news graph construction")
    graph_sub = p_graph.add_subparsers(dest="graph_command", required=True)
    p = graph_sub.add_parser("build", help="build and dump news graphs")
    _add_kg_source(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--emb", required=True, help="embedding TSV from 'kge train'")
    p.add_argument("--aliases")
    p.add_argument("--features", choices=("hashed_tfidf", "external_file"), default="hashed_tfidf")
    p.add_argument("--text-dim", type=int, default=768)
    p.add_argument("--vectors", help="external vector TSV (features=external_file)")
    p.add_argument("--method", choices=("transe", "distmult"), default="transe")
    p.add_argument("--out", help="output graph dump (default: <out-dir>/graphs.bin)")

    p = sub.add_parser(
        "train",
        help="run the training stage (builds graphs first when --emb is given)",
    )
    p.add_argument("--corpus", help="override the config corpus path")
    p.add_argument("--kg", help="override the config KG directory")
    p.add_argument("--emb", help="embedding TSV to build graphs from before training")
    p = sub.add_parser("eval", help="run the evaluation stage")
    p.add_argument("--model", help="model checkpoint (default: <out-dir>/model.ckpt)")
    p = sub.add_parser("kfold", help="k-fold cross validation over the corpus graphs")
    p.add_argument("--k", type=int, default=10)
    p = sub.add_parser("ablate", help="run an ablation study")
    p.add_argument("--study", required=True, choices=STUDIES)
    p.add_argument("--grid", required=True, help="comma-separated grid points")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument(
        "--paired-split",
        action="store_true",
        help="keep consecutive document pairs on the same side of the split "
        "(for twin-paired synthetic corpora)",
    )
    p = sub.add_parser("synth", help="synthetic corpus generation")
    synth_sub = p.add_subparsers(dest="synth_command", required=True)
    p = synth_sub.add_parser("generate", help="write a synthetic KG + corpus")
    p.add_argument(
        "--spec",
        default="",
        help="comma-separated overrides, e.g. "
        "'n_docs=200,n_politicians=1000,noise_paragraph_rate=0,lexical_leak=false,seed=0'",
    )

    p = sub.add_parser("pipeline", help="run pipeline stages with caching")
    p.add_argument(
        "--stages",
        default=",".join(STAGES),
        help=f"comma-separated subset of {','.join(STAGES)}",
    )
    return parser


def _cmd_kg(args) -> int:
    triples_path, entities_path = _resolve_kg(args)
    kg = load_kg(triples_path, entities_path)
    if args.kg_command == "validate":
        print(f"OK: {kg.n_entities} entities, {kg.n_relations} relations, {kg.n_triples} triples")
        return 0
    if args.kg_command == "stats":
        print(json.dumps(kg.stats(), sort_keys=True, indent=2))
        return 0
    if args.kg_command == "bucket":
        records = load_scorecard(kg, args.scorecard)
        lines = []
        for record in records:
            triple = bucket_score(kg, record)
            lines.append(
                f"{kg.entities[triple.head].name}\t{kg.relations[triple.relation].name}"
                f"\t{kg.entities[triple.tail].name}"
            )
        text = "\n".join(lines) + ("\n" if lines else "")
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0
    # drop
    kept = drop_triples(kg, args.keep, args.drop_seed)
    lines = [
        f"{kg.entities[t.head].name}\t{kg.relations[t.relation].name}\t{kg.entities[t.tail].name}"
        for t in kept.triples
    ]
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    log.info("kept %d of %d triples", kept.n_triples, kg.n_triples)
    return 0


def _cmd_kge(args) -> int:
    triples_path, entities_path = _resolve_kg(args)
    kg = load_kg(triples_path, entities_path)
    if args.kge_command == "train":
        seed = args.kge_seed if args.kge_seed is not None else args.seed
        config = KgeConfig(
            dim=args.dim,
            epochs=args.epochs,
            learning_rate=args.lr,
            margin=args.margin,
            norm=args.norm,
            method=args.method,
            negatives_per_positive=args.negatives,
            batch_size=args.batch_size,
            seed=seed if seed is not None else 0,
        )
        table = train_embeddings(kg, config)
        save_embeddings(args.out, table, kg)
        log.info("wrote %s (%d x %d)", args.out, kg.n_entities, config.dim)
        return 0
    table = load_embeddings(args.embeddings, kg, method=args.method)
    result = link_prediction_eval(table, kg, args.k)
    print(json.dumps({f"hits_at_{args.k}": result["hits_at_k"], "mean_rank": result["mean_rank"]}))
    return 0


def _cmd_link(args) -> int:
    triples_path, entities_path = _resolve_kg(args)
    kg = load_kg(triples_path, entities_path)
    gaz = build_gazetteer(kg, args.aliases)
    docs = load_corpus(args.doc)
    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for doc in docs:
            for index, paragraph in enumerate(doc.paragraphs):
                write_mentions_tsv(sink, kg, doc.id, index, link_entities(gaz, paragraph))
    finally:
        if args.out:
            sink.close()
    return 0


def _cmd_graph(args) -> int:
    triples_path, entities_path = _resolve_kg(args)
    kg = load_kg(triples_path, entities_path)
    table = load_embeddings(args.emb, kg, method=args.method)
    gaz = build_gazetteer(kg, args.aliases)
    docs = load_corpus(args.corpus)
    if args.features == "external_file":
        if not args.vectors:
            raise SystemExit("error: --vectors is required with --features external_file")
        tf = load_external_vectors(args.vectors)
    else:
        texts = [d.title for d in docs if d.title is not None]
        texts += [p for d in docs for p in d.paragraphs]
        tf = fit_tfidf(texts, dim=args.text_dim)
    graphs = [build_news_graph(d, gaz, tf, table) for d in docs]
    out = Path(args.out) if args.out else _out_dir(args) / "graphs.bin"
    save_graphs(out, graphs, d_text=tf.dim, d_e=table.dim)
    log.info("wrote %s (%d graphs)", out, len(graphs))
    return 0


def _cmd_stage(args, stages, model_path=None, embeddings_path=None) -> int:
    config = _load_config(args)
    results = run_pipeline(
        config, stages, out_dir=args.out_dir,
        model_path=model_path, embeddings_path=embeddings_path,
    )
    for result in results:
        status = "cached" if result.skipped else "built"
        log.info("stage %-5s %s: %s", result.name, status, ", ".join(result.artifacts))
    return 0


def _cmd_train(args) -> int:
    config = _load_config(args)
    if args.corpus:
        config = replace(config, corpus=args.corpus)
    if args.kg:
        base = Path(args.kg)
        config = replace(
            config,
            kg_entities=str(base / "entities.tsv"),
            kg_triples=str(base / "triples.tsv"),
        )
    stages = ["graph", "train"] if args.emb else ["train"]
    results = run_pipeline(
        config, stages, out_dir=args.out_dir, embeddings_path=args.emb
    )
    for result in results:
        status = "cached" if result.skipped else "built"
        log.info("stage %-5s %s: %s", result.name, status, ", ".join(result.artifacts))
    return 0


def _cmd_kfold(args) -> int:
    config = _load_config(args)
    out = _out_dir(args, config)
    run_pipeline(config, ["kg", "kge", "graph"], out_dir=out)
    from .newsgraph import load_graphs

    graphs, _, _ = load_graphs(out / "graphs.bin")
    result = run_kfold(graphs, args.k, config.seed, config.train_config(), config.gnn_config())
    payload = result.to_dict()
    (out / "kfold_metrics.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    with open(out / "folds.csv", "w", encoding="utf-8") as fh:
        fh.write("fold,accuracy,macro_f1\n")
        for i, fold in enumerate(result.folds):
            fh.write(f"{i},{fold.accuracy!r},{fold.macro_f1!r}\n")
    plot_fold_metrics(
        [m.accuracy for m in result.folds],
        [m.macro_f1 for m in result.folds],
        out / "folds.png",
    )
    log.info(
        "kfold: accuracy %.4f +/- %.4f, macro-F1 %.4f +/- %.4f",
        result.mean_accuracy, result.std_accuracy,
        result.mean_macro_f1, result.std_macro_f1,
    )
    return 0


def _cmd_ablate(args) -> int:
    config = _load_config(args)
    if config.corpus is None:
        raise SystemExit("error: ablate requires a config with a 'corpus' path")
    out = _out_dir(args, config)
    triples_path, entities_path = (
        (Path(config.kg_triples), Path(config.kg_entities))
        if config.kg_triples and config.kg_entities
        else builtin_kg_paths()
    )
    kg = load_kg(triples_path, entities_path)
    docs = load_corpus(config.corpus)
    aliases = load_alias_pairs(config.aliases) if config.aliases else []
    groups = [pair_group_of(i) for i in range(len(docs))] if args.paired_split else None
    configs = DeskConfigs(
        kge=config.kge_config(),
        gnn=config.gnn_config(),
        train=config.train_config(),
        text_dim=config.text_dim,
        eval_fraction=config.eval_fraction,
    )
    grid = [point.strip() for point in args.grid.split(",") if point.strip()]
    result = ablate(
        args.study, grid, kg, aliases, docs,
        configs=configs, reps=args.reps, base_seed=config.seed, groups=groups,
    )
    write_rows_csv(out / f"{args.study}_runs.csv", result.rows)
    write_summary_csv(out / f"{args.study}_summary.csv", result.summary)
    plot_ablation(result.summary, args.study, out / f"{args.study}.png")
    for row in result.summary:
        log.info(
            "%s = %-10s accuracy %.4f +/- %.4f, macro-F1 %.4f +/- %.4f",
            args.study, row["grid_point"],
            row["mean_accuracy"], row["std_accuracy"],
            row["mean_macro_f1"], row["std_macro_f1"],
        )
    return 0


def _parse_synth_spec(text: str, seed_override) -> SynthSpec:
    spec = SynthSpec()
    if text:
        for item in text.split(","):
            key, _, value = item.partition("=")
            key, value = key.strip(), value.strip()
            if not hasattr(spec, key):
                raise SystemExit(f"error: unknown synth spec key {key!r}")
            if key == "lexical_leak":
                parsed = value.lower() in ("1", "true", "yes")
            elif key == "noise_paragraph_rate":
                parsed = float(value)
            else:
                parsed = int(value)
            setattr(spec, key, parsed)
    if seed_override is not None:
        spec.seed = seed_override
    spec.validate()
    return spec


def _cmd_synth(args) -> int:
    spec = _parse_synth_spec(args.spec, args.seed)
    out = _out_dir(args)
    kg, aliases, docs = generate_synthetic_corpus(spec)
    kg_dir = out / "kg"
    kg_dir.mkdir(exist_ok=True)
    save_kg(kg, kg_dir / "triples.tsv", kg_dir / "entities.tsv")
    with open(out / "aliases.tsv", "w", encoding="utf-8") as fh:
        for alias, name in aliases:
            fh.write(f"{alias}\t{name}\n")
    save_corpus(out / "corpus.jsonl", docs)
    config_text = "\n".join(
        [
            "# desk-scale defaults for the generated synthetic corpus",
            f"kg_entities = {kg_dir / 'entities.tsv'}",
            f"kg_triples = {kg_dir / 'triples.tsv'}",
            f"aliases = {out / 'aliases.tsv'}",
            f"corpus = {out / 'corpus.jsonl'}",
            f"out_dir = {out}",
            "text_dim = 64",
            "hidden = 64",
            "kge_dim = 16",
            "kge_epochs = 100",
            "kge_learning_rate = 0.05",
            "max_epochs = 30",
            f"seed = {spec.seed}",
        ]
    ) + "\n"
    (out / "pipeline.cfg").write_text(config_text, encoding="utf-8")
    log.info(
        "wrote synthetic corpus: %d docs, %d entities, %d triples, config %s",
        len(docs), kg.n_entities, kg.n_triples, out / "pipeline.cfg",
    )
    return 0


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "kg":
            return _cmd_kg(args)
        if args.command == "kge":
            return _cmd_kge(args)
        if args.command == "link":
            return _cmd_link(args)
        if args.command == "graph":
            return _cmd_graph(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_stage(args, ["eval"], model_path=args.model)
        if args.command == "kfold":
            return _cmd_kfold(args)
        if args.command == "ablate":
            return _cmd_ablate(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "pipeline":
            stages = [s.strip() for s in args.stages.split(",") if s.strip()]
            return _cmd_stage(args, stages)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ConfigError, KgFormatError, GazetteerError, PipelineError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
