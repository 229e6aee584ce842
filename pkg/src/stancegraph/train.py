"""Training loop (Adam), evaluation, and k-fold cross validation."""

from dataclasses import dataclass, field

import numpy as np

from .gnn import (
    GnnConfig,
    ModelParams,
    init_params,
    loss_forward,
    model_backward,
    model_forward,
)
from .metrics import Metrics, compute_metrics
from .newsgraph import NewsGraph, batch_graphs


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 16
    max_epochs: int = 50
    lam: float = 1e-5  # L2 penalty weight
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1 or self.max_epochs < 0:
            raise ValueError("batch_size must be >= 1 and max_epochs >= 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1 and self.eps > 0):
            raise ValueError("invalid Adam constants")


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0


def init_adam_state(params: ModelParams) -> AdamState:
    return AdamState(
        m={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
        v={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
    )


def adam_step(
    params: ModelParams, grads: ModelParams, state: AdamState, config: TrainConfig
) -> tuple[ModelParams, AdamState]:
    """Bias-corrected Adam update, elementwise and in place."""
    state.t += 1
    bc1 = 1.0 - config.beta1**state.t
    bc2 = 1.0 - config.beta2**state.t
    for (name, w), (_, g) in zip(params.named_arrays(), grads.named_arrays()):
        m, v = state.m[name], state.v[name]
        if m.shape != g.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        m *= config.beta1
        m += (1.0 - config.beta1) * g
        v *= config.beta2
        v += (1.0 - config.beta2) * g * g
        w -= config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.eps)
    return params, state


def _check_labeled(graphs: list[NewsGraph], classes: int) -> None:
    for g in graphs:
        if g.label is None:
            raise ValueError(f"graph {g.doc_id!r} has no label")
        if not 0 <= g.label < classes:
            raise ValueError(f"graph {g.doc_id!r} label {g.label} outside [0, {classes})")


def fit(
    graphs: list[NewsGraph],
    config: TrainConfig,
    gnn_config: GnnConfig,
    params: ModelParams | None = None,
) -> tuple[ModelParams, list[float]]:
    """Mini-batch training; shuffling and dropout are seeded per (seed, epoch).

    Returns the trained parameters and the per-epoch summed training loss.
    """
    config.validate()
    gnn_config.validate()
    if not graphs:
        raise ValueError("no training graphs")
    _check_labeled(graphs, gnn_config.classes)
    d_text = graphs[0].text_attrs.shape[1]
    d_e = graphs[0].entity_attrs.shape[1]
    if params is None:
        params = init_params(gnn_config, d_text, d_e, seed=config.seed)
    state = init_adam_state(params)
    n = len(graphs)
    loss_curve: list[float] = []
    for epoch in range(config.max_epochs):
        order = np.random.default_rng([config.seed, epoch]).permutation(n)
        epoch_loss = 0.0
        for step, start in enumerate(range(0, n, config.batch_size)):
            chosen = order[start : start + config.batch_size]
            batch = batch_graphs([graphs[i] for i in chosen])
            out = model_forward(
                batch, params, gnn_config, training=True, seed=[config.seed, epoch, step]
            )
            labels = [g.label for g in (graphs[i] for i in chosen)]
            epoch_loss += loss_forward(out.yhat, labels, params, config.lam)
            grads, _ = model_backward(out.trace, labels, params, config.lam)
            adam_step(params, grads, state, config)
        loss_curve.append(epoch_loss)
    return params, loss_curve


def predict(
    params: ModelParams, graphs: list[NewsGraph], gnn_config: GnnConfig, batch_size: int = 64
) -> np.ndarray:
    """Eval-mode argmax predictions, chunked for memory."""
    preds = []
    for start in range(0, len(graphs), batch_size):
        batch = batch_graphs(graphs[start : start + batch_size])
        out = model_forward(batch, params, gnn_config, training=False)
        preds.append(np.argmax(out.logits, axis=1))
    return np.concatenate(preds)


def evaluate(
    params: ModelParams, graphs: list[NewsGraph], gnn_config: GnnConfig
) -> Metrics:
    _check_labeled(graphs, gnn_config.classes)
    y_pred = predict(params, graphs, gnn_config)
    y_true = np.array([g.label for g in graphs])
    return compute_metrics(y_true, y_pred, gnn_config.classes)


def fold_plan(n_docs: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded partition into k folds whose sizes differ by at most one."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n_docs:
        raise ValueError(f"k = {k} exceeds corpus size {n_docs}")
    order = np.random.default_rng(seed).permutation(n_docs)
    return [np.sort(fold) for fold in np.array_split(order, k)]


@dataclass
class KfoldResult:
    folds: list[Metrics]
    mean_accuracy: float
    std_accuracy: float
    mean_macro_f1: float
    std_macro_f1: float
    plan: list[np.ndarray] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "folds": [m.to_dict() for m in self.folds],
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_macro_f1": self.mean_macro_f1,
            "std_macro_f1": self.std_macro_f1,
        }


def kfold(
    graphs: list[NewsGraph],
    k: int,
    seed: int,
    config: TrainConfig,
    gnn_config: GnnConfig,
) -> KfoldResult:
    """Train on k-1 folds, test on the held-out fold, aggregate mean/std."""
    plan = fold_plan(len(graphs), k, seed)
    fold_metrics = []
    for held_out in plan:
        test_ids = set(held_out.tolist())
        train = [g for i, g in enumerate(graphs) if i not in test_ids]
        test = [graphs[i] for i in held_out]
        params, _ = fit(train, config, gnn_config)
        fold_metrics.append(evaluate(params, test, gnn_config))
    acc = np.array([m.accuracy for m in fold_metrics])
    maf = np.array([m.macro_f1 for m in fold_metrics])
    return KfoldResult(
        folds=fold_metrics,
        mean_accuracy=float(acc.mean()),
        std_accuracy=float(acc.std()),
        mean_macro_f1=float(maf.mean()),
        std_macro_f1=float(maf.std()),
        plan=plan,
    )


def split_indices(
    n_docs: int, eval_fraction: float, seed: int, labels=None, groups=None
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/eval split.

    With labels, the split is stratified per class. With groups, whole
    groups go to one side (and stratification applies to groups via their
    first member's label, which is exact for label-balanced groups).
    """
    if not 0.0 < eval_fraction < 1.0:
        raise ValueError("eval_fraction must be in (0, 1)")
    rng = np.random.default_rng([seed, 1])
    if groups is not None:
        groups = np.asarray(groups)
        unique = np.unique(groups)
        order = unique[rng.permutation(len(unique))]
        n_eval = int(round(eval_fraction * len(unique)))
        eval_groups = set(order[:n_eval].tolist())
        members = np.arange(n_docs)
        eval_mask = np.isin(groups, list(eval_groups))
        return members[~eval_mask], members[eval_mask]
    if labels is None:
        order = rng.permutation(n_docs)
        n_eval = int(round(eval_fraction * n_docs))
        return np.sort(order[n_eval:]), np.sort(order[:n_eval])
    labels = np.asarray(labels)
    train_parts, eval_parts = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        order = members[rng.permutation(len(members))]
        n_eval = int(round(eval_fraction * len(members)))
        eval_parts.append(order[:n_eval])
        train_parts.append(order[n_eval:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(eval_parts))
