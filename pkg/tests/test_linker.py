"""Gazetteer construction and alias matching."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stancegraph.kg import EntityRecord, KnowledgeGraph, default_relations
from stancegraph.linker import (
    GazetteerError,
    Mention,
    build_gazetteer,
    link_entities,
)


def make_kg(names):
    entities = [EntityRecord(i, name, "senator") for i, name in enumerate(names)]
    return KnowledgeGraph(entities, default_relations(), [])


class TestBuildGazetteer:
    def test_auto_registers_canonical_names(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        assert gaz.alias_to_entity == {"ted cruz": 0}

    def test_alias_file_extends(self, tmp_path):
        kg = make_kg(["Ted Cruz"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Senator Cruz\tTed Cruz\n", encoding="utf-8")
        gaz = build_gazetteer(kg, aliases)
        assert gaz.alias_to_entity["senator cruz"] == 0
        assert gaz.alias_to_entity["ted cruz"] == 0

    def test_collision_rejected(self, tmp_path):
        kg = make_kg(["Ted Cruz", "Penelope Cruz"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Cruz\tTed Cruz\nCruz\tPenelope Cruz\n", encoding="utf-8")
        with pytest.raises(GazetteerError, match="two entities"):
            build_gazetteer(kg, aliases)

    def test_same_mapping_twice_is_idempotent(self, tmp_path):
        kg = make_kg(["Ted Cruz"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Cruz\tTed Cruz\nCruz\tTed Cruz\n", encoding="utf-8")
        gaz = build_gazetteer(kg, aliases)
        assert gaz.alias_to_entity["cruz"] == 0

    def test_unknown_target(self, tmp_path):
        kg = make_kg(["Ted Cruz"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Cruz\tRafael Cruz\n", encoding="utf-8")
        with pytest.raises(GazetteerError, match="not in KG"):
            build_gazetteer(kg, aliases)


class TestLinkEntities:
    def test_single_match_span(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        mentions = link_entities(gaz, "Ted Cruz criticized the bill")
        assert mentions == [Mention(0, 0, 8)]

    def test_case_insensitive(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        assert link_entities(gaz, "TED CRUZ spoke") == [Mention(0, 0, 8)]

    def test_longest_match_wins(self, tmp_path):
        kg = make_kg(["Ted Cruz"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Cruz\tTed Cruz\n", encoding="utf-8")
        gaz = build_gazetteer(kg, aliases)
        mentions = link_entities(gaz, "Ted Cruz spoke, then Cruz left")
        assert mentions == [Mention(0, 0, 8), Mention(0, 21, 25)]

    def test_no_match(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        assert link_entities(gaz, "Nothing to see here") == []

    def test_duplicate_mentions_allowed(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        mentions = link_entities(gaz, "Ted Cruz met Ted Cruz")
        assert [m.entity for m in mentions] == [0, 0]
        assert mentions[0].start < mentions[1].start

    def test_token_boundary_blocks_substring(self):
        gaz = build_gazetteer(make_kg(["Ada"]))
        # "Adams" must not match the alias "Ada"
        assert link_entities(gaz, "Adams testified") == []
        assert link_entities(gaz, "Ada testified") == [Mention(0, 0, 3)]

    def test_spans_non_overlapping_and_sorted(self, tmp_path):
        kg = make_kg(["Ted Cruz", "Cruz Control"])
        aliases = tmp_path / "aliases.tsv"
        aliases.write_text("Cruz\tTed Cruz\n", encoding="utf-8")
        gaz = build_gazetteer(kg, aliases)
        text = "Cruz Control and Ted Cruz and Cruz"
        mentions = link_entities(gaz, text)
        for a, b in zip(mentions, mentions[1:]):
            assert a.end <= b.start
        # longest-first at position 0 picks "cruz control"
        assert mentions[0] == Mention(1, 0, 12)

    def test_idempotent(self):
        gaz = build_gazetteer(make_kg(["Ted Cruz"]))
        text = "Ted Cruz, Ted Cruz."
        assert link_entities(gaz, text) == link_entities(gaz, text)

    @given(
        st.sampled_from(["Ted Cruz spoke.", "No match here.", "cruz wins", ""]),
        st.sampled_from(["Ted Cruz again!", "nothing", "CRUZ and Ted Cruz"]),
    )
    def test_concatenation_decomposes(self, a, b):
        gaz = build_gazetteer(make_kg(["Ted Cruz", "Cruz"]))
        joined = a + " | " + b
        offset = len(a) + 3
        expected = link_entities(gaz, a) + [
            Mention(m.entity, m.start + offset, m.end + offset)
            for m in link_entities(gaz, b)
        ]
        assert link_entities(gaz, joined) == expected
