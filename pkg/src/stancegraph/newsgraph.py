"""Heterogeneous per-document news graphs.

Node kinds: document (at most one, present iff the document has a title),
paragraph, entity. Relations: doc-para (document to every paragraph),
para-para (consecutive paragraphs), para-ent (paragraph to each distinct
mentioned KG entity). Raw node attributes are text vectors for
document/paragraph nodes and KG embedding rows for entity nodes.

Corpus file: JSON Lines, one object per document with fields ``id``,
optional ``title``, ``paragraphs`` (array of strings), optional ``label``.
"""

import json
from dataclasses import dataclass

import numpy as np

from .kge import EmbeddingTable
from .linker import Gazetteer, link_entities
from .serialize import read_container, write_container
from .textfeat import EXTERNAL_FILE, paragraph_key, title_key

DOC_PARA = "doc-para"
PARA_PARA = "para-para"
PARA_ENT = "para-ent"
RELATIONS = (DOC_PARA, PARA_PARA, PARA_ENT)

KIND_DOCUMENT = 0
KIND_PARAGRAPH = 1
KIND_ENTITY = 2


@dataclass
class NewsDocument:
    id: str
    paragraphs: list[str]
    title: str | None = None
    label: int | None = None

    def __post_init__(self):
        if not self.paragraphs:
            raise ValueError(f"document {self.id!r} has no paragraphs")
        if self.label is not None and self.label < 0:
            raise ValueError(f"document {self.id!r} has negative label")


@dataclass
class NewsGraph:
    doc_id: str
    kinds: np.ndarray          # (n,) int8 node kinds
    text_attrs: np.ndarray     # (n_text, d_text) document/paragraph vectors
    entity_attrs: np.ndarray   # (n_ent, d_e) embedding rows
    text_nodes: np.ndarray     # node index of each text_attrs row
    entity_nodes: np.ndarray   # node index of each entity_attrs row
    entity_ids: np.ndarray     # KG entity id per entity_attrs row
    edges: dict[str, np.ndarray]  # relation -> (m, 2) directed int array
    s: int                     # paragraph count
    label: int | None

    @property
    def n_nodes(self) -> int:
        return len(self.kinds)

    @property
    def paragraph_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.kinds == KIND_PARAGRAPH)


def _text_vector(provider, key: str, text: str) -> np.ndarray:
    if provider.kind == EXTERNAL_FILE:
        return provider.embed_text(key)
    return provider.embed_text(text)


def build_news_graph(
    doc: NewsDocument,
    gaz: Gazetteer,
    tf,
    emb: EmbeddingTable,
) -> NewsGraph:
    """Assemble the canonical graph: [document?] + paragraphs + entities."""
    s = len(doc.paragraphs)
    has_doc = doc.title is not None
    para_offset = 1 if has_doc else 0

    text_rows = []
    if has_doc:
        text_rows.append(_text_vector(tf, title_key(doc.id), doc.title))
    for k, text in enumerate(doc.paragraphs):
        text_rows.append(_text_vector(tf, paragraph_key(doc.id, k), text))
    text_attrs = np.stack(text_rows)

    pairs = set()
    for k, text in enumerate(doc.paragraphs):
        for mention in link_entities(gaz, text):
            pairs.add((k, mention.entity))
    entity_ids = np.array(sorted({ent for _, ent in pairs}), dtype=np.int64)
    if entity_ids.size and entity_ids.max() >= emb.entity_vectors.shape[0]:
        raise ValueError(
            f"document {doc.id!r}: entity mention {int(entity_ids.max())} "
            "has no embedding row"
        )
    entity_attrs = (
        emb.entity_vectors[entity_ids]
        if entity_ids.size
        else np.zeros((0, emb.dim))
    )
    node_of_entity = {int(e): para_offset + s + i for i, e in enumerate(entity_ids)}

    n_nodes = para_offset + s + len(entity_ids)
    kinds = np.full(n_nodes, KIND_ENTITY, dtype=np.int8)
    if has_doc:
        kinds[0] = KIND_DOCUMENT
    kinds[para_offset : para_offset + s] = KIND_PARAGRAPH

    edges = {
        DOC_PARA: np.array(
            [(0, para_offset + k) for k in range(s)] if has_doc else [], dtype=np.int64
        ).reshape(-1, 2),
        PARA_PARA: np.array(
            [(para_offset + k, para_offset + k + 1) for k in range(s - 1)], dtype=np.int64
        ).reshape(-1, 2),
        PARA_ENT: np.array(
            [(para_offset + k, node_of_entity[e]) for k, e in sorted(pairs)], dtype=np.int64
        ).reshape(-1, 2),
    }
    text_nodes = np.arange(para_offset + s, dtype=np.int64)
    entity_nodes = np.arange(para_offset + s, n_nodes, dtype=np.int64)
    return NewsGraph(
        doc.id, kinds, text_attrs, entity_attrs, text_nodes, entity_nodes,
        entity_ids, edges, s, doc.label,
    )


def permute_nodes(graph: NewsGraph, perm: np.ndarray) -> NewsGraph:
    """Relabel nodes (perm[old] = new) with edges remapped accordingly."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(graph.n_nodes)):
        raise ValueError("perm is not a permutation of node ids")
    kinds = np.empty_like(graph.kinds)
    kinds[perm] = graph.kinds
    edges = {name: perm[e] if e.size else e for name, e in graph.edges.items()}
    return NewsGraph(
        graph.doc_id, kinds, graph.text_attrs, graph.entity_attrs,
        perm[graph.text_nodes], perm[graph.entity_nodes], graph.entity_ids,
        edges, graph.s, graph.label,
    )


def drop_para_ent_edges(graph: NewsGraph, keep_fraction: float, seed: int) -> NewsGraph:
    """Uniformly keep ceil(f * m) para-ent edges; drops orphaned entity nodes."""
    if not 0.0 <= keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction {keep_fraction} outside [0, 1]")
    old = graph.edges[PARA_ENT]
    n_keep = int(np.ceil(keep_fraction * len(old)))
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(old), size=n_keep, replace=False)) if n_keep else []
    kept = old[chosen].reshape(-1, 2)

    # rebuild without entity nodes that lost all their edges
    keep_entity_nodes = np.unique(kept[:, 1]) if kept.size else np.array([], dtype=np.int64)
    keep_rows = np.isin(graph.entity_nodes, keep_entity_nodes)
    old_to_new = {}
    n_text = len(graph.text_nodes)
    for i, node in enumerate(graph.text_nodes):
        old_to_new[int(node)] = i  # canonical graphs: text nodes are 0..n_text-1
    for j, node in enumerate(graph.entity_nodes[keep_rows]):
        old_to_new[int(node)] = n_text + j
    remap = np.vectorize(old_to_new.__getitem__, otypes=[np.int64])

    edges = {
        DOC_PARA: remap(graph.edges[DOC_PARA]) if graph.edges[DOC_PARA].size else graph.edges[DOC_PARA],
        PARA_PARA: remap(graph.edges[PARA_PARA]) if graph.edges[PARA_PARA].size else graph.edges[PARA_PARA],
        PARA_ENT: remap(kept) if kept.size else np.zeros((0, 2), dtype=np.int64),
    }
    kinds = np.concatenate([
        graph.kinds[graph.text_nodes],
        np.full(int(keep_rows.sum()), KIND_ENTITY, dtype=np.int8),
    ])
    return NewsGraph(
        graph.doc_id, kinds, graph.text_attrs, graph.entity_attrs[keep_rows],
        np.arange(n_text, dtype=np.int64),
        np.arange(n_text, n_text + int(keep_rows.sum()), dtype=np.int64),
        graph.entity_ids[keep_rows], edges, graph.s, graph.label,
    )


def remove_edge_type(graph: NewsGraph, relation: str) -> NewsGraph:
    """Empty one relation's edge list (para-ent removal also drops entity nodes)."""
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    if relation == PARA_ENT:
        return drop_para_ent_edges(graph, 0.0, seed=0)
    edges = dict(graph.edges)
    edges[relation] = np.zeros((0, 2), dtype=np.int64)
    return NewsGraph(
        graph.doc_id, graph.kinds, graph.text_attrs, graph.entity_attrs,
        graph.text_nodes, graph.entity_nodes, graph.entity_ids, edges,
        graph.s, graph.label,
    )


@dataclass
class GraphBatch:
    """Disjoint union of news graphs with per-graph bookkeeping."""

    kinds: np.ndarray
    text_attrs: np.ndarray
    entity_attrs: np.ndarray
    text_nodes: np.ndarray
    entity_nodes: np.ndarray
    edges: dict[str, np.ndarray]
    offsets: list[int]                 # node offset per graph
    paragraph_nodes: list[np.ndarray]  # global paragraph node ids per graph
    labels: list[int | None]
    doc_ids: list[str]

    @property
    def n_nodes(self) -> int:
        return len(self.kinds)

    @property
    def n_graphs(self) -> int:
        return len(self.offsets)


def batch_graphs(graphs: list[NewsGraph]) -> GraphBatch:
    if not graphs:
        raise ValueError("cannot batch an empty graph list")
    offsets, kinds, text_nodes, entity_nodes = [], [], [], []
    edges = {name: [] for name in RELATIONS}
    paragraph_nodes = []
    offset = 0
    for g in graphs:
        offsets.append(offset)
        kinds.append(g.kinds)
        text_nodes.append(g.text_nodes + offset)
        entity_nodes.append(g.entity_nodes + offset)
        paragraph_nodes.append(g.paragraph_nodes + offset)
        for name in RELATIONS:
            if g.edges[name].size:
                edges[name].append(g.edges[name] + offset)
        offset += g.n_nodes
    d_text = graphs[0].text_attrs.shape[1]
    d_e = graphs[0].entity_attrs.shape[1]
    return GraphBatch(
        kinds=np.concatenate(kinds),
        text_attrs=np.concatenate([g.text_attrs for g in graphs])
        if any(g.text_attrs.size for g in graphs)
        else np.zeros((0, d_text)),
        entity_attrs=np.concatenate([g.entity_attrs for g in graphs])
        if any(g.entity_attrs.size for g in graphs)
        else np.zeros((0, d_e)),
        text_nodes=np.concatenate(text_nodes),
        entity_nodes=np.concatenate(entity_nodes),
        edges={
            name: np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
            for name, parts in edges.items()
        },
        offsets=offsets,
        paragraph_nodes=paragraph_nodes,
        labels=[g.label for g in graphs],
        doc_ids=[g.doc_id for g in graphs],
    )


def load_corpus(path) -> list[NewsDocument]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{line_no}: invalid JSON ({err})") from None
            for field_name in ("id", "paragraphs"):
                if field_name not in record:
                    raise ValueError(f"{path}:{line_no}: missing field {field_name!r}")
            docs.append(
                NewsDocument(
                    id=str(record["id"]),
                    paragraphs=list(record["paragraphs"]),
                    title=record.get("title"),
                    label=record.get("label"),
                )
            )
    return docs


def save_corpus(path, docs: list[NewsDocument]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = {"id": doc.id, "paragraphs": doc.paragraphs}
            if doc.title is not None:
                record["title"] = doc.title
            if doc.label is not None:
                record["label"] = doc.label
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def save_graphs(path, graphs: list[NewsGraph], d_text: int, d_e: int) -> None:
    """Dump graphs to the binary container (node table, edges, attributes)."""
    meta = []
    arrays: list[tuple[str, np.ndarray]] = []
    for i, g in enumerate(graphs):
        meta.append({"doc_id": g.doc_id, "s": g.s, "label": g.label})
        arrays.append((f"g{i}/kinds", g.kinds))
        arrays.append((f"g{i}/text_attrs", g.text_attrs))
        arrays.append((f"g{i}/entity_attrs", g.entity_attrs))
        arrays.append((f"g{i}/text_nodes", g.text_nodes))
        arrays.append((f"g{i}/entity_nodes", g.entity_nodes))
        arrays.append((f"g{i}/entity_ids", g.entity_ids))
        for name in RELATIONS:
            arrays.append((f"g{i}/edges/{name}", g.edges[name]))
    header = {"kind": "news-graphs", "d_text": d_text, "d_e": d_e, "graphs": meta}
    write_container(path, header, arrays)


def load_graphs(path) -> tuple[list[NewsGraph], int, int]:
    header, arrays = read_container(path)
    if header.get("kind") != "news-graphs":
        raise ValueError(f"{path}: not a news-graph dump")
    graphs = []
    for i, meta in enumerate(header["graphs"]):
        graphs.append(
            NewsGraph(
                doc_id=meta["doc_id"],
                kinds=arrays[f"g{i}/kinds"],
                text_attrs=arrays[f"g{i}/text_attrs"],
                entity_attrs=arrays[f"g{i}/entity_attrs"],
                text_nodes=arrays[f"g{i}/text_nodes"],
                entity_nodes=arrays[f"g{i}/entity_nodes"],
                entity_ids=arrays[f"g{i}/entity_ids"],
                edges={name: arrays[f"g{i}/edges/{name}"] for name in RELATIONS},
                s=meta["s"],
                label=meta["label"],
            )
        )
    return graphs, header["d_text"], header["d_e"]
