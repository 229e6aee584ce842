"""Gated relational graph convolution for graph-level stance classification.

Forward path: project raw node attributes to the hidden width (shared
document/paragraph projection, separate entity projection, Leaky-ReLU),
run L message-passing layers, mean-pool paragraph rows, and classify with
a linear layer + softmax. Three layer variants:

  * gated_rgcn — per-relation transforms with a sigmoid gate blending
    tanh of the aggregated message into the previous state,
  * rgcn       — per-relation transforms, Leaky-ReLU output,
  * gcn_homogeneous — one shared transform over the merged neighborhoods.

The backward path computes exact gradients of the summed cross-entropy
plus L2 penalty for every parameter (and the raw attributes, for checks).

Checkpoint layout: the binary container of serialize.py with a header
carrying (variant, layers, hidden, classes, d_text, d_e, leaky_slope,
dropout, relations) and float64 parameter matrices in named order.
"""

from dataclasses import dataclass, field

import numpy as np

from .newsgraph import RELATIONS, GraphBatch
from .serialize import read_container, write_container

GATED_RGCN = "gated_rgcn"
RGCN = "rgcn"
GCN_HOMOGENEOUS = "gcn_homogeneous"
VARIANTS = (GATED_RGCN, RGCN, GCN_HOMOGENEOUS)

MERGED = "merged"


@dataclass
class GnnConfig:
    variant: str = GATED_RGCN
    layers: int = 2
    hidden: int = 512
    classes: int = 2
    leaky_slope: float = 0.01
    dropout: float = 0.5

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.hidden < 1 or self.classes < 2:
            raise ValueError("hidden must be >= 1 and classes >= 2")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def relation_names(self) -> tuple[str, ...]:
        return (MERGED,) if self.variant == GCN_HOMOGENEOUS else RELATIONS

    @property
    def gated(self) -> bool:
        return self.variant == GATED_RGCN


@dataclass
class LayerParams:
    theta_self: np.ndarray                 # (h, h)
    theta_rel: dict[str, np.ndarray]       # relation -> (h, h)
    w_gate: np.ndarray | None = None       # (2h, h), gated variant only
    b_gate: np.ndarray | None = None       # (h,)


@dataclass
class ModelParams:
    variant: str
    w_text: np.ndarray   # (d_text, h) shared document/paragraph projection
    b_text: np.ndarray   # (h,)
    w_ent: np.ndarray    # (d_e, h)
    b_ent: np.ndarray    # (h,)
    layers: list[LayerParams]
    w_out: np.ndarray    # (h, Y)
    b_out: np.ndarray    # (Y,)

    def named_arrays(self) -> list[tuple[str, np.ndarray]]:
        """Deterministic (name, array) order; defines init, Adam, and checkpoint order."""
        out = [
            ("w_text", self.w_text),
            ("b_text", self.b_text),
            ("w_ent", self.w_ent),
            ("b_ent", self.b_ent),
        ]
        for i, layer in enumerate(self.layers):
            out.append((f"layer{i}/theta_self", layer.theta_self))
            for name in sorted(layer.theta_rel):
                out.append((f"layer{i}/theta/{name}", layer.theta_rel[name]))
            if layer.w_gate is not None:
                out.append((f"layer{i}/w_gate", layer.w_gate))
                out.append((f"layer{i}/b_gate", layer.b_gate))
        out.append(("w_out", self.w_out))
        out.append(("b_out", self.b_out))
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.variant,
            self.w_text.copy(), self.b_text.copy(),
            self.w_ent.copy(), self.b_ent.copy(),
            [
                LayerParams(
                    l.theta_self.copy(),
                    {k: v.copy() for k, v in l.theta_rel.items()},
                    None if l.w_gate is None else l.w_gate.copy(),
                    None if l.b_gate is None else l.b_gate.copy(),
                )
                for l in self.layers
            ],
            self.w_out.copy(), self.b_out.copy(),
        )

    def zeros_like(self) -> "ModelParams":
        grads = self.copy()
        for _, arr in grads.named_arrays():
            arr[...] = 0.0
        return grads

    def l2_sum(self) -> float:
        return float(sum(np.sum(a * a) for _, a in self.named_arrays()))


def init_params(config: GnnConfig, d_text: int, d_e: int, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases; draw order is the named order."""
    config.validate()
    rng = np.random.default_rng(seed)
    h, y = config.hidden, config.classes

    def glorot(fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=(fan_in, fan_out))

    layers = []
    for _ in range(config.layers):
        theta_self = glorot(h, h)
        theta_rel = {name: glorot(h, h) for name in sorted(config.relation_names)}
        w_gate = glorot(2 * h, h) if config.gated else None
        b_gate = np.zeros(h) if config.gated else None
        layers.append(LayerParams(theta_self, theta_rel, w_gate, b_gate))
    return ModelParams(
        config.variant,
        glorot(d_text, h), np.zeros(h),
        glorot(d_e, h), np.zeros(h),
        layers,
        glorot(h, y), np.zeros(y),
    )


def leaky_relu(x, slope):
    return np.where(x > 0, x, slope * x)


def _leaky_grad(x, slope):
    return np.where(x > 0, 1.0, slope)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class RelationStructure:
    """Symmetrized, deduplicated adjacency of one relation."""

    dst: np.ndarray     # (m,) message destinations
    src: np.ndarray     # (m,) message sources
    counts: np.ndarray  # (n,) neighborhood sizes |N_r(i)|


def build_structures(batch: GraphBatch, relation_names) -> dict[str, RelationStructure]:
    """Each directed edge feeds both endpoints' neighborhoods, deduplicated."""
    n = batch.n_nodes
    structures = {}
    for name in relation_names:
        if name == MERGED:
            parts = [e for e in batch.edges.values() if e.size]
            edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
        else:
            edges = batch.edges[name]
        if edges.size:
            both = np.concatenate([edges, edges[:, ::-1]])
            both = np.unique(both, axis=0)
            dst, src = both[:, 0], both[:, 1]
        else:
            dst = src = np.zeros(0, dtype=np.int64)
        counts = np.bincount(dst, minlength=n).astype(np.float64)
        structures[name] = RelationStructure(dst, src, counts)
    return structures


@dataclass
class ProjectionCache:
    z_text: np.ndarray  # pre-activation rows for document/paragraph nodes
    z_ent: np.ndarray   # pre-activation rows for entity nodes


def project_initial_features(
    batch: GraphBatch,
    params: ModelParams,
    config: GnnConfig,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, ProjectionCache, np.ndarray | None]:
    """Leaky-ReLU linear projections to width h; inverted dropout iff training."""
    h = params.w_text.shape[1]
    if batch.text_attrs.shape[1] != params.w_text.shape[0]:
        raise ValueError(
            f"text attr width {batch.text_attrs.shape[1]} != projection input "
            f"{params.w_text.shape[0]}"
        )
    if batch.entity_attrs.shape[1] != params.w_ent.shape[0]:
        raise ValueError(
            f"entity attr width {batch.entity_attrs.shape[1]} != projection input "
            f"{params.w_ent.shape[0]}"
        )
    z_text = batch.text_attrs @ params.w_text + params.b_text
    z_ent = batch.entity_attrs @ params.w_ent + params.b_ent
    x0 = np.zeros((batch.n_nodes, h))
    x0[batch.text_nodes] = leaky_relu(z_text, config.leaky_slope)
    x0[batch.entity_nodes] = leaky_relu(z_ent, config.leaky_slope)
    mask = _dropout_mask(x0.shape, config, training, rng)
    if mask is not None:
        x0 = x0 * mask
    return x0, ProjectionCache(z_text, z_ent), mask


def _dropout_mask(shape, config, training, rng):
    if not training or config.dropout == 0.0:
        return None
    if rng is None:
        raise ValueError("training-mode dropout requires a seeded generator")
    return (rng.random(shape) >= config.dropout) / (1.0 - config.dropout)


@dataclass
class LayerCache:
    x_in: np.ndarray
    u: np.ndarray
    means: dict[str, np.ndarray]
    tanh_u: np.ndarray | None
    gate: np.ndarray | None


def layer_forward(
    x_prev: np.ndarray,
    structures: dict[str, RelationStructure],
    layer: LayerParams,
    variant: str,
    leaky_slope: float = 0.01,
) -> tuple[np.ndarray, LayerCache]:
    """One message-passing layer; empty neighborhoods contribute zero."""
    u = x_prev @ layer.theta_self
    means = {}
    for name in sorted(layer.theta_rel):
        st = structures[name]
        mean = np.zeros_like(x_prev)
        if st.dst.size:
            np.add.at(mean, st.dst, x_prev[st.src])
            mean /= np.maximum(st.counts, 1.0)[:, None]
        means[name] = mean
        u += mean @ layer.theta_rel[name]
    if variant == GATED_RGCN:
        stacked = np.concatenate([u, x_prev], axis=1)
        gate = sigmoid(stacked @ layer.w_gate + layer.b_gate)
        tanh_u = np.tanh(u)
        x_next = tanh_u * gate + x_prev * (1.0 - gate)
        return x_next, LayerCache(x_prev, u, means, tanh_u, gate)
    x_next = leaky_relu(u, leaky_slope)
    return x_next, LayerCache(x_prev, u, means, None, None)


def pool_paragraph_means(x: np.ndarray, batch: GraphBatch) -> np.ndarray:
    """Per-graph mean over paragraph rows only; other node kinds are ignored."""
    return np.stack([x[paras].sum(axis=0) / len(paras) for paras in batch.paragraph_nodes])


@dataclass
class ForwardTrace:
    """Training-mode activations; sufficient for exact gradients."""

    batch: GraphBatch
    structures: dict[str, RelationStructure]
    projection: ProjectionCache
    drop_masks: list[np.ndarray | None]  # after x0 and after each layer
    layer_caches: list[LayerCache]
    x_final: np.ndarray
    pooled: np.ndarray
    logits: np.ndarray
    yhat: np.ndarray
    leaky_slope: float


@dataclass
class ForwardResult:
    yhat: np.ndarray
    logits: np.ndarray
    trace: ForwardTrace | None


def model_forward(
    batch: GraphBatch,
    params: ModelParams,
    config: GnnConfig,
    training: bool = False,
    seed=None,
) -> ForwardResult:
    """Project, run L layers, mean-pool paragraph rows, classify."""
    config.validate()
    if params.variant != config.variant:
        raise ValueError(f"params built for {params.variant!r}, config wants {config.variant!r}")
    for k, paras in enumerate(batch.paragraph_nodes):
        if len(paras) == 0:
            raise ValueError(f"graph {batch.doc_ids[k]!r} has no paragraph nodes")
    rng = None
    if training and config.dropout > 0.0:
        rng = np.random.default_rng(seed)
    structures = build_structures(batch, config.relation_names)

    x, projection, mask0 = project_initial_features(batch, params, config, training, rng)
    drop_masks = [mask0]
    layer_caches = []
    for layer in params.layers:
        x, cache = layer_forward(x, structures, layer, config.variant, config.leaky_slope)
        layer_caches.append(cache)
        mask = _dropout_mask(x.shape, config, training, rng)
        if mask is not None:
            x = x * mask
        drop_masks.append(mask)

    pooled = pool_paragraph_means(x, batch)
    logits = pooled @ params.w_out + params.b_out
    yhat = softmax(logits)
    trace = None
    if training:
        trace = ForwardTrace(
            batch, structures, projection, drop_masks, layer_caches, x, pooled,
            logits, yhat, config.leaky_slope,
        )
    return ForwardResult(yhat, logits, trace)


def loss_forward(yhat: np.ndarray, labels, params: ModelParams, lam: float) -> float:
    """Summed cross-entropy over the batch plus lam * sum of squared parameters."""
    labels = np.asarray(labels, dtype=np.int64)
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if labels.min() < 0 or labels.max() >= yhat.shape[1]:
        raise ValueError("label outside class range")
    p_true = yhat[np.arange(len(labels)), labels]
    if np.any(p_true == 0.0):
        raise ValueError("predicted probability of a true class underflowed to zero")
    return float(-np.sum(np.log(p_true)) + lam * params.l2_sum())


def model_backward(
    trace: ForwardTrace,
    labels,
    params: ModelParams,
    lam: float,
) -> tuple[ModelParams, dict[str, np.ndarray]]:
    """Exact gradients of loss_forward; cross-entropy fused at the logits.

    Returns (parameter gradients mirroring ModelParams, input-attribute
    gradients under keys 'text_attrs' and 'entity_attrs').
    """
    labels = np.asarray(labels, dtype=np.int64)
    batch = trace.batch
    grads = params.zeros_like()
    h = params.w_text.shape[1]

    d_logits = trace.yhat.copy()
    d_logits[np.arange(len(labels)), labels] -= 1.0
    grads.w_out += trace.pooled.T @ d_logits
    grads.b_out += d_logits.sum(axis=0)
    d_pooled = d_logits @ params.w_out.T

    dx = np.zeros((batch.n_nodes, h))
    for k, paras in enumerate(batch.paragraph_nodes):
        dx[paras] += d_pooled[k] / len(paras)

    for l in range(len(params.layers) - 1, -1, -1):
        mask = trace.drop_masks[l + 1]
        if mask is not None:
            dx = dx * mask
        cache = trace.layer_caches[l]
        layer, g_layer = params.layers[l], grads.layers[l]
        if params.variant == GATED_RGCN:
            gate, tanh_u = cache.gate, cache.tanh_u
            du = dx * gate * (1.0 - tanh_u * tanh_u)
            d_gate = dx * (tanh_u - cache.x_in)
            dx_in = dx * (1.0 - gate)
            dz = d_gate * gate * (1.0 - gate)
            stacked = np.concatenate([cache.u, cache.x_in], axis=1)
            g_layer.w_gate += stacked.T @ dz
            g_layer.b_gate += dz.sum(axis=0)
            d_stacked = dz @ layer.w_gate.T
            du += d_stacked[:, :h]
            dx_in += d_stacked[:, h:]
        else:
            du = dx * _leaky_grad(cache.u, trace.leaky_slope)
            dx_in = np.zeros_like(dx)
        g_layer.theta_self += cache.x_in.T @ du
        dx_in += du @ layer.theta_self.T
        for name in sorted(layer.theta_rel):
            g_layer.theta_rel[name] += cache.means[name].T @ du
            st = trace.structures[name]
            if st.dst.size:
                d_mean = du @ layer.theta_rel[name].T
                d_mean = d_mean / np.maximum(st.counts, 1.0)[:, None]
                np.add.at(dx_in, st.src, d_mean[st.dst])
        dx = dx_in

    mask0 = trace.drop_masks[0]
    if mask0 is not None:
        dx = dx * mask0
    slope = trace.leaky_slope
    dz_text = dx[batch.text_nodes] * _leaky_grad(trace.projection.z_text, slope)
    dz_ent = dx[batch.entity_nodes] * _leaky_grad(trace.projection.z_ent, slope)
    grads.w_text += batch.text_attrs.T @ dz_text
    grads.b_text += dz_text.sum(axis=0)
    grads.w_ent += batch.entity_attrs.T @ dz_ent
    grads.b_ent += dz_ent.sum(axis=0)
    input_grads = {
        "text_attrs": dz_text @ params.w_text.T,
        "entity_attrs": dz_ent @ params.w_ent.T,
    }

    if lam:
        for (_, w), (_, g) in zip(params.named_arrays(), grads.named_arrays()):
            g += 2.0 * lam * w
    return grads, input_grads


def save_checkpoint(path, params: ModelParams, config: GnnConfig, d_text: int, d_e: int) -> None:
    header = {
        "kind": "model-checkpoint",
        "version": 1,
        "variant": config.variant,
        "layers": config.layers,
        "hidden": config.hidden,
        "classes": config.classes,
        "d_text": d_text,
        "d_e": d_e,
        "leaky_slope": config.leaky_slope,
        "dropout": config.dropout,
        "relations": list(config.relation_names),
    }
    write_container(path, header, params.named_arrays())


def load_checkpoint(path) -> tuple[ModelParams, GnnConfig, int, int]:
    header, arrays = read_container(path)
    if header.get("kind") != "model-checkpoint":
        raise ValueError(f"{path}: not a model checkpoint")
    config = GnnConfig(
        variant=header["variant"],
        layers=header["layers"],
        hidden=header["hidden"],
        classes=header["classes"],
        leaky_slope=header["leaky_slope"],
        dropout=header["dropout"],
    )
    params = init_params(config, header["d_text"], header["d_e"], seed=0)
    for name, arr in params.named_arrays():
        arr[...] = arrays[name]
    return params, config, header["d_text"], header["d_e"]
