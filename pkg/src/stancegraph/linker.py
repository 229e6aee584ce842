"""Gazetteer-based entity linking: deterministic alias matching in text.

Alias TSV layout: ``alias <TAB> entity_name`` (entity_name must resolve in
the KG). Canonical entity names are always registered as aliases.
"""

import re
from dataclasses import dataclass, field

from .kg import KnowledgeGraph, _read_tsv

_WORD = re.compile(r"\w", re.UNICODE)


class GazetteerError(ValueError):
    pass


@dataclass(frozen=True)
class Mention:
    entity: int
    start: int
    end: int


def _fold(text: str) -> str:
    # Length-preserving lowercase so match offsets stay valid; characters
    # whose lowercase expands (e.g. 'İ') are left as-is.
    return "".join(ch if len(ch.lower()) != 1 else ch.lower() for ch in text)


@dataclass
class Gazetteer:
    """Case-folded alias -> entity id map with longest-match lookup support."""

    alias_to_entity: dict[str, int] = field(default_factory=dict)
    # first token -> aliases sharing it, longest first
    _by_first_token: dict[str, list[str]] = field(default_factory=dict, repr=False)

    def add(self, alias: str, entity: int) -> None:
        folded = _fold(alias.strip())
        if not folded:
            raise GazetteerError("empty alias")
        existing = self.alias_to_entity.get(folded)
        if existing is not None:
            if existing != entity:
                raise GazetteerError(
                    f"alias {alias!r} maps to two entities ({existing} and {entity})"
                )
            return
        self.alias_to_entity[folded] = entity
        first = folded.split()[0]
        bucket = self._by_first_token.setdefault(first, [])
        bucket.append(folded)
        bucket.sort(key=len, reverse=True)

    def __len__(self) -> int:
        return len(self.alias_to_entity)


def load_alias_pairs(path) -> list[tuple[str, str]]:
    """Read an alias TSV into (alias, entity_name) pairs."""
    return [(alias, name) for _, (alias, name) in _read_tsv(path, 2)]


def register_aliases(gaz: Gazetteer, kg: KnowledgeGraph, pairs, source="aliases") -> None:
    """Add (alias, entity_name) pairs; rejects unknown targets and collisions."""
    for line_no, (alias, entity_name) in enumerate(pairs, start=1):
        if not kg.has_entity(entity_name):
            raise GazetteerError(
                f"{source}:{line_no}: alias target {entity_name!r} not in KG"
            )
        try:
            gaz.add(alias, kg.entity_id(entity_name))
        except GazetteerError as err:
            raise GazetteerError(f"{source}:{line_no}: {err}") from None


def build_gazetteer(kg: KnowledgeGraph, aliases_path=None) -> Gazetteer:
    """Register canonical names, then optional extra aliases from a TSV file."""
    gaz = Gazetteer()
    for ent in kg.entities:
        gaz.add(ent.name, ent.id)
    if aliases_path is not None:
        pairs = [fields for _, fields in _read_tsv(aliases_path, 2)]
        register_aliases(gaz, kg, pairs, source=str(aliases_path))
    return gaz


def _is_boundary(text: str, pos: int) -> bool:
    """True between a word char and a non-word char, or at a string edge."""
    if pos <= 0 or pos >= len(text):
        return True
    return bool(_WORD.match(text[pos - 1])) != bool(_WORD.match(text[pos]))


def link_entities(gaz: Gazetteer, text: str) -> list[Mention]:
    """Longest-match-first, non-overlapping, left-to-right alias matching."""
    folded = _fold(text)
    mentions: list[Mention] = []
    pos = 0
    n = len(folded)
    while pos < n:
        if not (_WORD.match(folded[pos]) and _is_boundary(folded, pos)):
            pos += 1
            continue
        token_end = pos
        while token_end < n and _WORD.match(folded[token_end]):
            token_end += 1
        first_token = folded[pos:token_end]
        matched = None
        for alias in gaz._by_first_token.get(first_token, ()):
            end = pos + len(alias)
            if folded.startswith(alias, pos) and _is_boundary(folded, end):
                matched = (alias, end)
                break
        if matched is None:
            pos = token_end
            continue
        alias, end = matched
        mentions.append(Mention(gaz.alias_to_entity[alias], pos, end))
        pos = end
    return mentions


def write_mentions_tsv(fh, kg: KnowledgeGraph, doc_id: str, para_index: int, mentions):
    for m in mentions:
        fh.write(f"{doc_id}\t{para_index}\t{kg.entities[m.entity].name}\t{m.start}\t{m.end}\n")
