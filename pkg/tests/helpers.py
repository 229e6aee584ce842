"""Shared test utilities: synthetic KGs and finite-difference oracles."""

import numpy as np

from stancegraph.kg import EntityRecord, KnowledgeGraph, Triple, default_relations


def make_kg(n_entities, triples, entity_type="senator"):
    entities = [EntityRecord(i, f"e{i}", entity_type) for i in range(n_entities)]
    return KnowledgeGraph(entities, default_relations(), [Triple(*t) for t in triples])


def ring_kg(n_entities=20):
    """Three relations stepping +1, +3, +5 around a ring: 3n triples."""
    triples = []
    for rel, step in ((0, 1), (1, 3), (2, 5)):
        for i in range(n_entities):
            triples.append((i, rel, (i + step) % n_entities))
    return make_kg(n_entities, triples)


def chain_hub_kg(n_entities=20):
    """Members 0..13 linked to two hubs per relation plus member chains.

    Translation-realizable structure (66 triples) that a translational
    embedding fits well; used for the link-prediction sanity check.
    """
    triples = []
    for rel in range(3):
        low, high = 14 + 2 * rel, 15 + 2 * rel
        for i in range(14):
            triples.append((i, rel, high if (i >> rel) & 1 else low))
    triples += [(i, 0, i + 1) for i in range(13)]
    triples += [(i, 1, i + 3) for i in range(11)]
    return make_kg(n_entities, triples)


def numeric_grad(fn, array, eps=1e-6):
    """Central finite differences of scalar fn w.r.t. every entry of array."""
    grad = np.zeros_like(array)
    flat = array.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        up = fn()
        flat[i] = orig - eps
        down = fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2 * eps)
    return grad


def max_rel_error(analytic, numeric, floor=1e-6):
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def dense_layer_oracle(x, edges, layer, variant, leaky_slope=0.01):
    """Literal dense-matrix implementation of one message-passing layer.

    Materializes each relation's symmetric normalized adjacency as an n x n
    matrix and aggregates with full matrix products. Independent of the
    library's scatter-based path.
    """
    from stancegraph.gnn import GATED_RGCN, GCN_HOMOGENEOUS, MERGED

    n = x.shape[0]
    u = x @ layer.theta_self
    for name in sorted(layer.theta_rel):
        if name == MERGED:
            pairs = [tuple(e) for arr in edges.values() for e in arr]
        else:
            pairs = [tuple(e) for e in edges[name]]
        adj = np.zeros((n, n))
        for a, b in pairs:
            adj[a, b] = 1.0
            adj[b, a] = 1.0
        counts = adj.sum(axis=1)
        norm = adj / np.maximum(counts, 1.0)[:, None]
        u += (norm @ x) @ layer.theta_rel[name]
    if variant == GATED_RGCN:
        z = np.concatenate([u, x], axis=1) @ layer.w_gate + layer.b_gate
        gate = 1.0 / (1.0 + np.exp(-z))
        return np.tanh(u) * gate + x * (1.0 - gate)
    return np.where(u > 0, u, leaky_slope * u)


def random_news_graph(rng, s=5, n_ent=3, d_text=7, d_e=5, title=True, label=0, doc_id="doc"):
    """Random-attribute news graph with the canonical node layout."""
    from stancegraph.newsgraph import DOC_PARA, PARA_ENT, PARA_PARA, NewsGraph

    off = 1 if title else 0
    n = off + s + n_ent
    kinds = np.array(([0] if title else []) + [1] * s + [2] * n_ent, dtype=np.int8)
    pairs = set()
    for e in range(n_ent):
        for k in rng.choice(s, size=rng.integers(1, s + 1), replace=False):
            pairs.add((int(k), e))
    edges = {
        DOC_PARA: np.array([(0, off + k) for k in range(s)] if title else [], dtype=np.int64).reshape(-1, 2),
        PARA_PARA: np.array([(off + k, off + k + 1) for k in range(s - 1)], dtype=np.int64).reshape(-1, 2),
        PARA_ENT: np.array(
            [(off + k, off + s + e) for k, e in sorted(pairs)], dtype=np.int64
        ).reshape(-1, 2),
    }
    return NewsGraph(
        doc_id=doc_id,
        kinds=kinds,
        text_attrs=rng.normal(size=(off + s, d_text)),
        entity_attrs=rng.normal(size=(n_ent, d_e)),
        text_nodes=np.arange(off + s, dtype=np.int64),
        entity_nodes=np.arange(off + s, n, dtype=np.int64),
        entity_ids=np.arange(n_ent, dtype=np.int64),
        edges=edges,
        s=s,
        label=label,
    )
