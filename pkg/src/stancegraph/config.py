"""Typed flat key/value pipeline configuration.

File format: one ``key = value`` pair per line, ``#`` comments, UTF-8.
Unknown keys are rejected (with a close-match suggestion) rather than
ignored, and every constraint violation reports field, value, and the
constraint. An empty file yields the fully defaulted configuration.
"""

import difflib
from dataclasses import dataclass, fields
from pathlib import Path

from .gnn import VARIANTS, GnnConfig
from .kge import L1, L2, METHODS, KgeConfig
from .train import TrainConfig


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


@dataclass
class PipelineConfig:
    # paths (None where optional or supplied later)
    kg_entities: str | None = None
    kg_triples: str | None = None
    aliases: str | None = None
    corpus: str | None = None
    vectors_file: str | None = None
    out_dir: str = "out"
    # text features
    features: str = "hashed_tfidf"
    text_dim: int = 768
    # KG embedding training
    kge_method: str = "transe"
    kge_dim: int = 200
    kge_epochs: int = 500
    kge_learning_rate: float = 0.01
    kge_margin: float = 1.0
    kge_negatives: int = 1
    kge_norm: str = L2
    kge_batch_size: int = 128
    # classifier
    variant: str = "gated_rgcn"
    layers: int = 2
    hidden: int = 512
    classes: int = 2
    leaky_slope: float = 0.01
    dropout: float = 0.5
    # optimization
    learning_rate: float = 1e-3
    batch_size: int = 16
    max_epochs: int = 50
    l2_lambda: float = 1e-5
    eval_fraction: float = 0.2
    seed: int = 0

    def kge_config(self) -> KgeConfig:
        return KgeConfig(
            dim=self.kge_dim,
            epochs=self.kge_epochs,
            learning_rate=self.kge_learning_rate,
            margin=self.kge_margin,
            negatives_per_positive=self.kge_negatives,
            norm=self.kge_norm,
            method=self.kge_method,
            batch_size=self.kge_batch_size,
            seed=self.seed,
        )

    def gnn_config(self) -> GnnConfig:
        return GnnConfig(
            variant=self.variant,
            layers=self.layers,
            hidden=self.hidden,
            classes=self.classes,
            leaky_slope=self.leaky_slope,
            dropout=self.dropout,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            lam=self.l2_lambda,
            seed=self.seed,
        )


_PATH_KEYS = ("kg_entities", "kg_triples", "aliases", "corpus", "vectors_file", "out_dir")

_CHOICES = {
    "features": ("hashed_tfidf", "external_file"),
    "kge_method": METHODS,
    "kge_norm": (L1, L2),
    "variant": VARIANTS,
}

# field -> (predicate, constraint description)
_CONSTRAINTS = {
    "text_dim": (lambda v: v > 0, "must be > 0"),
    "kge_dim": (lambda v: v > 0, "must be > 0"),
    "kge_epochs": (lambda v: v >= 0, "must be >= 0"),
    "kge_learning_rate": (lambda v: v > 0, "must be > 0"),
    "kge_margin": (lambda v: v > 0, "must be > 0"),
    "kge_negatives": (lambda v: v >= 1, "must be >= 1"),
    "kge_batch_size": (lambda v: v >= 1, "must be >= 1"),
    "layers": (lambda v: v >= 1, "must be >= 1"),
    "hidden": (lambda v: v >= 1, "must be >= 1"),
    "classes": (lambda v: v >= 2, "must be >= 2"),
    "leaky_slope": (lambda v: 0 <= v < 1, "must be in [0, 1)"),
    "dropout": (lambda v: 0 <= v < 1, "must be in [0, 1)"),
    "learning_rate": (lambda v: v > 0, "must be > 0"),
    "batch_size": (lambda v: v >= 1, "must be >= 1"),
    "max_epochs": (lambda v: v >= 0, "must be >= 0"),
    "l2_lambda": (lambda v: v >= 0, "must be >= 0"),
    "eval_fraction": (lambda v: 0 < v < 1, "must be in (0, 1)"),
}


def _target_type(annotation):
    if annotation in (int, "int"):
        return int
    if annotation in (float, "float"):
        return float
    return str


def parse_config_text(text: str, source: str = "config") -> PipelineConfig:
    field_types = {f.name: f.type for f in fields(PipelineConfig)}
    known = list(field_types)
    values: dict[str, object] = {}
    errors: list[str] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{line_no}: expected 'key = value', got {line!r}")
            continue
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in field_types:
            suggestion = difflib.get_close_matches(key, known, n=1)
            hint = f" (did you mean {suggestion[0]!r}?)" if suggestion else ""
            errors.append(f"{source}:{line_no}: unknown key {key!r}{hint}")
            continue
        if key in values:
            errors.append(f"{source}:{line_no}: duplicate key {key!r}")
            continue
        target = _target_type(field_types[key])
        try:
            values[key] = target(value)
        except ValueError:
            errors.append(
                f"{source}:{line_no}: field {key!r} = {value!r} is not a valid {target.__name__}"
            )
    if errors:
        raise ConfigError(errors)
    config = PipelineConfig(**values)
    validate_fields(config, errors)
    if errors:
        raise ConfigError(errors)
    return config


def validate_fields(config: PipelineConfig, errors: list[str]) -> None:
    for name, choices in _CHOICES.items():
        value = getattr(config, name)
        if value not in choices:
            errors.append(f"field {name!r} = {value!r} violates: must be one of {choices}")
    for name, (check, constraint) in _CONSTRAINTS.items():
        value = getattr(config, name)
        if not check(value):
            errors.append(f"field {name!r} = {value!r} violates: {constraint}")


def validate_config(path) -> PipelineConfig:
    """Parse and validate a config file; referenced paths must exist."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError([f"cannot read config {path}: {err}"]) from None
    config = parse_config_text(text, source=str(path))
    errors = []
    for key in _PATH_KEYS:
        if key == "out_dir":
            continue
        value = getattr(config, key)
        if value is not None and not Path(value).exists():
            errors.append(f"field {key!r} = {value!r} violates: path must exist")
    if config.features == "external_file" and config.vectors_file is None:
        errors.append("field 'vectors_file' is required when features = external_file")
    if errors:
        raise ConfigError(errors)
    return config
