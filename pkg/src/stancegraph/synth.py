"""Synthetic desk-scale corpus with controllable knowledge/text signal.

The generator builds a toy political KG (politicians strongly favoring or
strongly opposing two ideology entities, plus party and state edges) and
documents whose label is the majority camp of the politicians they
mention.

With lexical_leak off, wording is label-independent by construction:
documents come in twin pairs that share every filler decision and mention
mirrored politicians from opposite camps, and a camp-1 politician's name
is its camp-0 mirror's name with the two tokens swapped. Twin documents
therefore have identical bags of words with opposite labels, so text
features carry no class signal and only the paragraph-entity edges do.
With lexical_leak on, camp-indicative words are injected into mention
paragraphs, giving a text-only model something to learn.
"""

from dataclasses import dataclass

import numpy as np

from .kg import EntityRecord, KnowledgeGraph, Triple, default_relations
from .newsgraph import NewsDocument

# Odd, coprime pool sizes: (m mod 25, m mod 41) is injective for the pair
# index m below 1025, giving unique token pairs per politician pair.
FIRST_POOL = (
    "Avery", "Blair", "Casey", "Devon", "Ellis", "Finley", "Gray", "Harper",
    "Indigo", "Jules", "Kai", "Lane", "Marlow", "Noor", "Onyx", "Parker",
    "Quincy", "Reese", "Sage", "Tatum", "Uma", "Vale", "Winter", "Xen", "Yael",
)
LAST_POOL = (
    "Aldwin", "Bexley", "Corbin", "Dunmore", "Eldred", "Fenwick", "Garrow",
    "Hollis", "Iverson", "Jarrell", "Kepler", "Lowry", "Marsden", "Nulty",
    "Orrin", "Pemberton", "Quigley", "Rainier", "Selwyn", "Tilden", "Ulrich",
    "Varga", "Wendell", "Xiong", "Yarrow", "Zephyr", "Ashby", "Bram",
    "Caldwell", "Denholm", "Ewing", "Farley", "Gentry", "Hargrove", "Irwin",
    "Joplin", "Kirby", "Lachlan", "Mabry", "Norcross", "Oswald",
)

IDEOLOGIES = ("liberal_values", "conservative_values")
PARTIES = ("Unity Party", "Liberty Party")
STATE_POOL = (
    "Northland", "Southmark", "Eastvale", "Westmoor",
    "Lakewood", "Highfield", "Riverton", "Stonegate",
)

VERBS = ("criticized", "praised", "questioned", "discussed", "reviewed", "examined")
TOPICS = ("budget", "infrastructure", "committee", "amendment", "hearing", "proposal")
CLOSERS = (
    "during the session", "before the vote", "at the briefing",
    "in the chamber", "after the recess", "on the floor",
)
NOISE_SENTENCES = (
    "The schedule shifted twice before lunch.",
    "Staff circulated the agenda in the morning.",
    "Reporters waited outside the main hall.",
    "The session adjourned later than planned.",
    "A procedural note delayed the reading.",
    "Visitors filled the gallery by noon.",
)
LEAK_WORDS = ("equityward", "heritagewise")  # camp-indicative, pool-disjoint


@dataclass
class SynthSpec:
    n_docs: int = 200
    n_politicians: int = 1000
    noise_paragraph_rate: float = 0.0
    lexical_leak: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.n_docs <= 0 or self.n_politicians <= 0:
            raise ValueError("n_docs and n_politicians must be positive")
        if self.n_politicians % 2:
            raise ValueError("n_politicians must be even (politicians come in camp pairs)")
        if self.n_politicians > 2 * len(FIRST_POOL) * len(LAST_POOL):
            raise ValueError(
                f"n_politicians must be <= {2 * len(FIRST_POOL) * len(LAST_POOL)}"
            )
        if not 0.0 <= self.noise_paragraph_rate <= 1.0:
            raise ValueError("noise_paragraph_rate must be in [0, 1]")


def politician_name(i: int) -> str:
    """Mirror pairs share tokens: camp 1 swaps its camp-0 twin's name order."""
    m = i // 2
    first = FIRST_POOL[m % len(FIRST_POOL)]
    last = LAST_POOL[m % len(LAST_POOL)]
    return f"{first} {last}" if i % 2 == 0 else f"{last} {first}"


def pair_group_of(doc_index: int) -> int:
    """Twin-pair group id of a generated document (for group-aware splits)."""
    return doc_index // 2


def build_toy_kg(spec: SynthSpec) -> KnowledgeGraph:
    entities: list[EntityRecord] = []
    for name in IDEOLOGIES:
        entities.append(EntityRecord(len(entities), name, "political_ideology"))
    for name in PARTIES:
        entities.append(EntityRecord(len(entities), name, "political_party"))
    for name in STATE_POOL:
        entities.append(EntityRecord(len(entities), name, "state"))
    first_pol = len(entities)
    for i in range(spec.n_politicians):
        entities.append(EntityRecord(len(entities), politician_name(i), "senator"))

    relations = default_relations()
    rel = {r.name: r.id for r in relations}
    ideology_ids = (0, 1)
    party_ids = (2, 3)
    state_ids = tuple(range(4, 4 + len(STATE_POOL)))

    triples = []
    for i in range(spec.n_politicians):
        camp = i % 2
        pol = first_pol + i
        triples.append(Triple(pol, rel["strongly_favor"], ideology_ids[camp]))
        triples.append(Triple(pol, rel["strongly_oppose"], ideology_ids[1 - camp]))
        triples.append(Triple(pol, rel["affiliated_to"], party_ids[camp]))
        triples.append(Triple(pol, rel["from"], state_ids[i % len(state_ids)]))
    return KnowledgeGraph(entities, relations, triples)


def generate_synthetic_corpus(
    spec: SynthSpec,
) -> tuple[KnowledgeGraph, list[tuple[str, str]], list[NewsDocument]]:
    """Returns (toy KG, alias pairs, labeled documents).

    Documents 2j and 2j+1 are twins with labels 0 and 1; labels are
    balanced for even n_docs, and each label equals the majority camp of
    the document's mentioned politicians.
    """
    spec.validate()
    kg = build_toy_kg(spec)
    n_pairs_avail = spec.n_politicians // 2
    aliases = [
        (f"Senator {politician_name(i)}", politician_name(i))
        for i in range(spec.n_politicians)
    ]

    # Politician pairs are consumed without replacement until the pool is
    # exhausted, keeping identity reuse (and thus memorization shortcuts)
    # minimal.
    queue_rng = np.random.default_rng([spec.seed, 11])
    queue: list[int] = []

    def draw_pairs(count: int) -> list[int]:
        out = []
        while len(out) < count:
            if not queue:
                queue.extend(queue_rng.permutation(n_pairs_avail).tolist())
            out.append(int(queue.pop()))
        return out

    docs: list[NewsDocument] = []
    for j in range((spec.n_docs + 1) // 2):
        rng = np.random.default_rng([spec.seed, 23, j])
        n_major = int(rng.integers(2, 4))
        n_minor = int(rng.integers(0, n_major))  # strict minority
        major_pairs = draw_pairs(n_major)
        minor_pairs = draw_pairs(n_minor)

        n_paras = int(rng.integers(3, 7))
        is_noise = rng.random(n_paras) < spec.noise_paragraph_rate
        if is_noise.all():
            is_noise[0] = False
        content_paras = np.flatnonzero(~is_noise)
        n_slots = n_major + n_minor
        assignment = [int(content_paras[k % len(content_paras)]) for k in range(n_slots)]
        slot_prefix = rng.random(n_slots) < 0.3
        slot_parts = [
            (int(rng.integers(len(VERBS))), int(rng.integers(len(TOPICS))),
             int(rng.integers(len(CLOSERS))))
            for _ in range(n_slots)
        ]
        para_extra_noise = rng.random(n_paras) < 0.5
        para_noise_idx = rng.integers(len(NOISE_SENTENCES), size=n_paras)
        title = f"Session notes on the {TOPICS[int(rng.integers(len(TOPICS)))]}"

        for label in (0, 1):
            d = 2 * j + label
            if d >= spec.n_docs:
                break
            majors = [2 * m + label for m in major_pairs]
            minors = [2 * m + (1 - label) for m in minor_pairs]
            mentioned = majors + minors
            paragraphs = []
            for k in range(n_paras):
                sentences = []
                for slot, pol in enumerate(mentioned):
                    if assignment[slot] == k:
                        name = politician_name(pol)
                        if slot_prefix[slot]:
                            name = f"Senator {name}"
                        verb, topic, closer = slot_parts[slot]
                        sentences.append(
                            f"{name} {VERBS[verb]} the {TOPICS[topic]} {CLOSERS[closer]}."
                        )
                has_mention = bool(sentences)
                if not sentences or para_extra_noise[k]:
                    sentences.append(NOISE_SENTENCES[para_noise_idx[k]])
                if spec.lexical_leak and has_mention:
                    sentences.append(f"The outlook stayed {LEAK_WORDS[label]} throughout.")
                paragraphs.append(" ".join(sentences))
            docs.append(NewsDocument(f"doc{d:04d}", paragraphs, title=title, label=label))
    return kg, aliases, docs


def majority_camp(doc: NewsDocument, kg: KnowledgeGraph, mentioned_ids) -> int:
    """Majority ideology camp among mentioned politician entity ids."""
    favor = kg.relation_id("strongly_favor")
    camp_of = {}
    for t in kg.triples:
        if t.relation == favor:
            camp_of[t.head] = t.tail  # ideology entity id 0 or 1
    votes = [camp_of[e] for e in mentioned_ids if e in camp_of]
    if not votes:
        raise ValueError(f"document {doc.id!r} mentions no politicians")
    return int(np.bincount(votes, minlength=2).argmax())
