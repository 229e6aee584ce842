"""Political knowledge graph store: typed entities, relations, triples.

File formats (UTF-8, no headers):
  entities TSV:  name <TAB> entity_type
  triples TSV:   head_name <TAB> relation_name <TAB> tail_name
  scorecard TSV: legislator_name <TAB> score <TAB> ideology_target_name
"""

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

ENTITY_TYPES = (
    "elected_office",
    "time_period",
    "president",
    "supreme_court_justice",
    "senator",
    "congressperson",
    "governor",
    "state",
    "political_party",
    "political_ideology",
)

# First five connect political actors to offices/places/periods; the last
# five encode bucketed scorecard stances toward an ideology entity.
RELATION_NAMES = (
    "affiliated_to",
    "from",
    "appoint",
    "overlap_with",
    "member_of",
    "strongly_favor",
    "favor",
    "neutral",
    "oppose",
    "strongly_oppose",
)

IDEOLOGY_RELATIONS = frozenset(
    {"strongly_favor", "favor", "neutral", "oppose", "strongly_oppose"}
)

# Lower-inclusive score buckets; the top bucket is closed at 100.
SCORE_BUCKETS = (
    (90.0, "strongly_favor"),
    (75.0, "favor"),
    (25.0, "neutral"),
    (10.0, "oppose"),
    (0.0, "strongly_oppose"),
)


class KgFormatError(ValueError):
    """Malformed or inconsistent KG input file."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass(frozen=True)
class EntityRecord:
    id: int
    name: str
    entity_type: str


@dataclass(frozen=True)
class RelationKind:
    id: int
    name: str


@dataclass(frozen=True)
class Triple:
    head: int
    relation: int
    tail: int


@dataclass(frozen=True)
class ScorecardRecord:
    legislator: int
    score: float
    ideology_target: int


@dataclass
class KnowledgeGraph:
    """Immutable-after-load container of interned entities and triples."""

    entities: list[EntityRecord]
    relations: list[RelationKind]
    triples: list[Triple]
    _entity_by_name: dict[str, int] = field(default_factory=dict, repr=False)
    _relation_by_name: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._entity_by_name:
            self._entity_by_name = {e.name.casefold(): e.id for e in self.entities}
        if not self._relation_by_name:
            self._relation_by_name = {r.name: r.id for r in self.relations}

    @property
    def n_entities(self) -> int:
        return len(self.entities)

    @property
    def n_relations(self) -> int:
        return len(self.relations)

    @property
    def n_triples(self) -> int:
        return len(self.triples)

    def entity_id(self, name: str) -> int:
        key = name.casefold()
        if key not in self._entity_by_name:
            raise KeyError(f"unknown entity: {name!r}")
        return self._entity_by_name[key]

    def relation_id(self, name: str) -> int:
        if name not in self._relation_by_name:
            raise KeyError(f"unknown relation: {name!r}")
        return self._relation_by_name[name]

    def has_entity(self, name: str) -> bool:
        return name.casefold() in self._entity_by_name

    def stats(self) -> dict:
        """Counts by category, suitable for the `kg stats` report."""
        by_type: dict[str, int] = {}
        for ent in self.entities:
            by_type[ent.entity_type] = by_type.get(ent.entity_type, 0) + 1
        by_rel: dict[str, int] = {r.name: 0 for r in self.relations}
        for t in self.triples:
            by_rel[self.relations[t.relation].name] += 1
        return {
            "entities": self.n_entities,
            "relations": self.n_relations,
            "triples": self.n_triples,
            "entities_by_type": by_type,
            "triples_by_relation": by_rel,
        }


def default_relations() -> list[RelationKind]:
    return [RelationKind(i, name) for i, name in enumerate(RELATION_NAMES)]


def _read_tsv(path, n_fields):
    """Yield (line_no, fields) for non-empty lines, validating field count."""
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise KgFormatError(
                    path, line_no, f"expected {n_fields} tab-separated fields, got {len(fields)}"
                )
            yield line_no, [f.strip() for f in fields]


def load_entities(path) -> list[EntityRecord]:
    entities: list[EntityRecord] = []
    seen: dict[str, int] = {}
    for line_no, (name, entity_type) in _read_tsv(path, 2):
        if not name:
            raise KgFormatError(path, line_no, "empty entity name")
        if entity_type not in ENTITY_TYPES:
            raise KgFormatError(path, line_no, f"unknown entity type {entity_type!r}")
        key = name.casefold()
        if key in seen:
            raise KgFormatError(
                path, line_no, f"duplicate entity name {name!r} (first seen on line {seen[key]})"
            )
        seen[key] = line_no
        entities.append(EntityRecord(len(entities), name, entity_type))
    return entities


def load_kg(triples_path, entities_path) -> KnowledgeGraph:
    """Load and validate a KG from the TSV pair; interning follows file order."""
    entities = load_entities(entities_path)
    relations = default_relations()
    kg = KnowledgeGraph(entities, relations, [])

    triples: list[Triple] = []
    seen: dict[tuple[int, int, int], int] = {}
    for line_no, (head, rel, tail) in _read_tsv(triples_path, 3):
        if rel not in kg._relation_by_name:
            raise KgFormatError(triples_path, line_no, f"unknown relation name {rel!r}")
        for name in (head, tail):
            if not kg.has_entity(name):
                raise KgFormatError(
                    triples_path, line_no, f"dangling entity reference {name!r}"
                )
        triple = Triple(kg.entity_id(head), kg.relation_id(rel), kg.entity_id(tail))
        if rel in IDEOLOGY_RELATIONS and triple.head == triple.tail:
            raise KgFormatError(
                triples_path, line_no, f"ideology relation {rel!r} with head == tail"
            )
        key = (triple.head, triple.relation, triple.tail)
        if key in seen:
            raise KgFormatError(
                triples_path,
                line_no,
                f"duplicate triple ({head}, {rel}, {tail}) (first seen on line {seen[key]})",
            )
        seen[key] = line_no
        triples.append(triple)
    kg.triples = triples
    return kg


def save_kg(kg: KnowledgeGraph, triples_path, entities_path) -> None:
    """Write the TSV pair back; load_kg on the result reproduces the KG."""
    with open(entities_path, "w", encoding="utf-8") as fh:
        for ent in kg.entities:
            fh.write(f"{ent.name}\t{ent.entity_type}\n")
    with open(triples_path, "w", encoding="utf-8") as fh:
        for t in kg.triples:
            fh.write(
                f"{kg.entities[t.head].name}\t{kg.relations[t.relation].name}"
                f"\t{kg.entities[t.tail].name}\n"
            )


def bucket_score(kg: KnowledgeGraph, record: ScorecardRecord) -> Triple:
    """Map a 0-100 scorecard entry to a stance triple toward its ideology target."""
    if not 0.0 <= record.score <= 100.0:
        raise ValueError(f"score {record.score} outside [0, 100]")
    target = kg.entities[record.ideology_target]
    if target.entity_type != "political_ideology":
        raise ValueError(
            f"ideology target {target.name!r} has entity type {target.entity_type!r}"
        )
    for lower, relation in SCORE_BUCKETS:
        if record.score >= lower:
            return Triple(record.legislator, kg.relation_id(relation), record.ideology_target)
    raise AssertionError("unreachable: buckets cover [0, 100]")


def load_scorecard(kg: KnowledgeGraph, path) -> list[ScorecardRecord]:
    records = []
    for line_no, (name, score_text, target) in _read_tsv(path, 3):
        try:
            score = float(score_text)
        except ValueError:
            raise KgFormatError(path, line_no, f"non-numeric score {score_text!r}") from None
        if not 0.0 <= score <= 100.0 or not math.isfinite(score):
            raise KgFormatError(path, line_no, f"score {score} outside [0, 100]")
        for ent_name in (name, target):
            if not kg.has_entity(ent_name):
                raise KgFormatError(path, line_no, f"dangling entity reference {ent_name!r}")
        records.append(ScorecardRecord(kg.entity_id(name), score, kg.entity_id(target)))
    return records


def drop_triples(kg: KnowledgeGraph, keep_fraction: float, seed: int) -> KnowledgeGraph:
    """Uniformly sample ceil(keep_fraction * n) triples without replacement.

    Entities and relations are untouched; the sample is deterministic per
    seed and preserves the original triple order.
    """
    if not 0.0 <= keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction {keep_fraction} outside [0, 1]")
    n_keep = math.ceil(keep_fraction * kg.n_triples)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(kg.n_triples, size=n_keep, replace=False) if n_keep else []
    kept = [kg.triples[i] for i in sorted(chosen)]
    return KnowledgeGraph(kg.entities, kg.relations, kept)


def builtin_kg_paths() -> tuple[Path, Path]:
    """(triples_path, entities_path) of the political KG shipped with the package."""
    root = resources.files("stancegraph").joinpath("data/political_kg")
    return Path(str(root / "triples.tsv")), Path(str(root / "entities.tsv"))
