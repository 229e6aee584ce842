"""Knowledge graph embeddings: translational (TransE) and bilinear (DistMult).

Trained tables provide the entity node attributes of news graphs. Training
minimizes a margin ranking loss with uniform head-or-tail corruption using
plain SGD; TransE entity rows are renormalized to unit L2 norm after every
epoch.

Embedding TSV layout: first line ``dim <d>``; then ``entity <name> <d
space-separated decimals>`` rows, then ``relation <name> ...`` rows. Names
may contain spaces; the trailing d fields are the vector.
"""

from dataclasses import dataclass

import numpy as np

from .kg import KnowledgeGraph

TRANSE = "transe"
DISTMULT = "distmult"
METHODS = (TRANSE, DISTMULT)

L1 = "L1"
L2 = "L2"


@dataclass
class KgeConfig:
    dim: int = 200
    epochs: int = 500
    learning_rate: float = 0.01
    margin: float = 1.0
    negatives_per_positive: int = 1
    norm: str = L2
    method: str = TRANSE
    batch_size: int = 128
    seed: int = 0

    def validate(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.negatives_per_positive < 1:
            raise ValueError("negatives_per_positive must be >= 1")
        if self.norm not in (L1, L2):
            raise ValueError(f"norm must be L1 or L2, got {self.norm!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass
class EmbeddingTable:
    entity_vectors: np.ndarray  # (n_entities, dim)
    relation_vectors: np.ndarray  # (n_relations, dim)
    dim: int
    method: str

    def __post_init__(self):
        if self.entity_vectors.shape[1] != self.dim or self.relation_vectors.shape[1] != self.dim:
            raise ValueError("vector width does not match dim")
        if not (np.all(np.isfinite(self.entity_vectors)) and np.all(np.isfinite(self.relation_vectors))):
            raise ValueError("non-finite embedding values")


def transe_score(h, r, t, norm: str = L2) -> float:
    """Translation distance ||h + r - t||; lower means more plausible."""
    h, r, t = np.asarray(h), np.asarray(r), np.asarray(t)
    if not h.shape == r.shape == t.shape:
        raise ValueError(f"dimension mismatch: {h.shape}, {r.shape}, {t.shape}")
    diff = h + r - t
    if norm == L1:
        return float(np.sum(np.abs(diff)))
    if norm == L2:
        return float(np.sqrt(np.sum(diff * diff)))
    raise ValueError(f"norm must be L1 or L2, got {norm!r}")


def distmult_score(h, r, t) -> float:
    """Trilinear product sum_i h_i r_i t_i; higher means more plausible."""
    h, r, t = np.asarray(h), np.asarray(r), np.asarray(t)
    if not h.shape == r.shape == t.shape:
        raise ValueError(f"dimension mismatch: {h.shape}, {r.shape}, {t.shape}")
    return float(np.sum(h * r * t))


def _init_table(n_entities: int, n_relations: int, config: KgeConfig) -> EmbeddingTable:
    rng = np.random.default_rng(config.seed)
    bound = 6.0 / np.sqrt(config.dim)
    ent = rng.uniform(-bound, bound, size=(n_entities, config.dim))
    rel = rng.uniform(-bound, bound, size=(n_relations, config.dim))
    ent /= np.linalg.norm(ent, axis=1, keepdims=True)
    return EmbeddingTable(ent, rel, config.dim, config.method)


def _batch_scores(ent, rel, triples, method, norm):
    h, r, t = ent[triples[:, 0]], rel[triples[:, 1]], ent[triples[:, 2]]
    if method == DISTMULT:
        return np.sum(h * r * t, axis=1)
    diff = h + r - t
    if norm == L1:
        return np.sum(np.abs(diff), axis=1)
    return np.sqrt(np.sum(diff * diff, axis=1))


def margin_loss_and_grads(ent, rel, pos, neg, margin, norm=L2, method=TRANSE):
    """Hinge ranking loss over (positive, corrupted) triple pairs.

    Returns (loss, d_entities, d_relations); gradients are exact wherever
    the loss is differentiable (ties at the hinge or a zero L2 difference
    are measure-zero and treated as inactive).
    """
    pos = np.asarray(pos, dtype=np.int64).reshape(-1, 3)
    neg = np.asarray(neg, dtype=np.int64).reshape(-1, 3)
    s_pos = _batch_scores(ent, rel, pos, method, norm)
    s_neg = _batch_scores(ent, rel, neg, method, norm)
    if method == DISTMULT:
        violation = margin - s_pos + s_neg  # want s_pos > s_neg
        sign_pos, sign_neg = -1.0, 1.0
    else:
        violation = margin + s_pos - s_neg  # want s_pos < s_neg
        sign_pos, sign_neg = 1.0, -1.0
    active = violation > 0.0
    loss = float(np.sum(violation[active]))

    d_ent = np.zeros_like(ent)
    d_rel = np.zeros_like(rel)
    for triples, sign in ((pos, sign_pos), (neg, sign_neg)):
        idx = triples[active]
        if idx.size == 0:
            continue
        h, r, t = ent[idx[:, 0]], rel[idx[:, 1]], ent[idx[:, 2]]
        if method == DISTMULT:
            gh, gr, gt = r * t, h * t, h * r
        else:
            diff = h + r - t
            if norm == L1:
                u = np.sign(diff)
            else:
                d = np.sqrt(np.sum(diff * diff, axis=1, keepdims=True))
                u = np.divide(diff, d, out=np.zeros_like(diff), where=d > 0)
            gh, gr, gt = u, u, -u
        np.add.at(d_ent, idx[:, 0], sign * gh)
        np.add.at(d_rel, idx[:, 1], sign * gr)
        np.add.at(d_ent, idx[:, 2], sign * gt)
    return loss, d_ent, d_rel


def train_embeddings(kg: KnowledgeGraph, config: KgeConfig) -> EmbeddingTable:
    """SGD on the margin ranking loss; deterministic per config.seed.

    With epochs == 0 the (seeded, entity-normalized) random initialization
    is returned. A KG with entities but no triples trains vacuously.
    """
    config.validate()
    if kg.n_entities == 0 and config.epochs > 0:
        raise ValueError("cannot train embeddings on a KG without entities")
    table = _init_table(kg.n_entities, kg.n_relations, config)
    if config.epochs == 0 or kg.n_triples == 0:
        return table

    triples = np.array([(t.head, t.relation, t.tail) for t in kg.triples], dtype=np.int64)
    n = len(triples)
    k = config.negatives_per_positive
    rng = np.random.default_rng(config.seed + 1)
    ent, rel = table.entity_vectors, table.relation_vectors
    for _ in range(config.epochs):
        order = rng.permutation(n)
        corrupt_head = rng.random((n, k)) < 0.5
        replacement = rng.integers(0, kg.n_entities, size=(n, k))
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            pos = np.repeat(triples[batch], k, axis=0)
            neg = pos.copy()
            heads = corrupt_head[batch].reshape(-1)
            repl = replacement[batch].reshape(-1)
            neg[heads, 0] = repl[heads]
            neg[~heads, 2] = repl[~heads]
            _, d_ent, d_rel = margin_loss_and_grads(
                ent, rel, pos, neg, config.margin, config.norm, config.method
            )
            ent -= config.learning_rate * d_ent
            rel -= config.learning_rate * d_rel
        if config.method == TRANSE:
            norms = np.linalg.norm(ent, axis=1, keepdims=True)
            np.divide(ent, norms, out=ent, where=norms > 0)
    return table


def link_prediction_eval(table: EmbeddingTable, kg: KnowledgeGraph, k: int) -> dict:
    """Filtered tail-prediction ranking over all entities."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if table.entity_vectors.shape[0] != kg.n_entities:
        raise ValueError("embedding table does not match KG entity count")
    known_tails: dict[tuple[int, int], set[int]] = {}
    for t in kg.triples:
        known_tails.setdefault((t.head, t.relation), set()).add(t.tail)

    ent, rel = table.entity_vectors, table.relation_vectors
    ranks = []
    for t in kg.triples:
        if table.method == DISTMULT:
            scores = ent @ (ent[t.head] * rel[t.relation])
            better = scores > scores[t.tail]
        else:
            diff = ent[t.head] + rel[t.relation] - ent
            scores = np.linalg.norm(diff, axis=1)
            better = scores < scores[t.tail]
        for other in known_tails[(t.head, t.relation)]:
            if other != t.tail:
                better[other] = False
        ranks.append(1 + int(np.count_nonzero(better)))
    ranks = np.array(ranks)
    return {"hits_at_k": float(np.mean(ranks <= k)), "mean_rank": float(np.mean(ranks))}


def save_embeddings(path, table: EmbeddingTable, kg: KnowledgeGraph) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim {table.dim}\n")
        for ent, vec in zip(kg.entities, table.entity_vectors):
            fh.write("entity " + ent.name + " " + " ".join(repr(float(v)) for v in vec) + "\n")
        for relation, vec in zip(kg.relations, table.relation_vectors):
            fh.write("relation " + relation.name + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def load_embeddings(path, kg: KnowledgeGraph, method: str = TRANSE) -> EmbeddingTable:
    """Read a table written by save_embeddings, aligned to the KG's interning."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "dim":
            raise ValueError(f"{path}:1: expected 'dim <d>' header")
        dim = int(header[1])
        ent = np.full((kg.n_entities, dim), np.nan)
        rel = np.full((kg.n_relations, dim), np.nan)
        for line_no, line in enumerate(fh, start=2):
            fields = line.split()
            if not fields:
                continue
            kind, name_parts, values = fields[0], fields[1:-dim], fields[-dim:]
            name = " ".join(name_parts)
            vec = np.array([float(v) for v in values])
            if kind == "entity":
                ent[kg.entity_id(name)] = vec
            elif kind == "relation":
                rel[kg.relation_id(name)] = vec
            else:
                raise ValueError(f"{path}:{line_no}: unknown row kind {kind!r}")
    if np.any(np.isnan(ent)) or np.any(np.isnan(rel)):
        raise ValueError(f"{path}: missing entity or relation rows")
    return EmbeddingTable(ent, rel, dim, method)
