"""News graph construction, batching, edge surgery, and serialization."""

import numpy as np
import pytest

from stancegraph.kg import EntityRecord, KnowledgeGraph, default_relations
from stancegraph.kge import TRANSE, EmbeddingTable
from stancegraph.linker import build_gazetteer
from stancegraph.newsgraph import (
    DOC_PARA,
    PARA_ENT,
    PARA_PARA,
    KIND_DOCUMENT,
    KIND_ENTITY,
    KIND_PARAGRAPH,
    NewsDocument,
    batch_graphs,
    build_news_graph,
    drop_para_ent_edges,
    load_corpus,
    load_graphs,
    permute_nodes,
    remove_edge_type,
    save_corpus,
    save_graphs,
)
from stancegraph.textfeat import fit_tfidf

from helpers import random_news_graph


@pytest.fixture
def setup():
    names = ["Ted Cruz", "Elizabeth Warren", "Texas"]
    entities = [EntityRecord(i, n, "senator") for i, n in enumerate(names)]
    kg = KnowledgeGraph(entities, default_relations(), [])
    gaz = build_gazetteer(kg)
    tf = fit_tfidf(["a seed corpus for idf statistics"], dim=6)
    rng = np.random.default_rng(0)
    emb = EmbeddingTable(rng.normal(size=(3, 4)), rng.normal(size=(10, 4)), 4, TRANSE)
    return kg, gaz, tf, emb


class TestBuildNewsGraph:
    def test_counts_without_mentions(self, setup):
        _, gaz, tf, emb = setup
        doc = NewsDocument("d1", ["plain text one", "plain two", "plain three"], title="a title")
        g = build_news_graph(doc, gaz, tf, emb)
        assert g.n_nodes == 4
        assert len(g.edges[DOC_PARA]) == 3
        assert len(g.edges[PARA_PARA]) == 2
        assert len(g.edges[PARA_ENT]) == 0
        assert g.s == 3

    def test_no_title_means_no_document_node(self, setup):
        _, gaz, tf, emb = setup
        doc = NewsDocument("d1", ["one", "two"])
        g = build_news_graph(doc, gaz, tf, emb)
        assert np.count_nonzero(g.kinds == KIND_DOCUMENT) == 0
        assert len(g.edges[DOC_PARA]) == 0
        assert g.n_nodes == 2

    def test_repeated_mention_deduplicated(self, setup):
        _, gaz, tf, emb = setup
        doc = NewsDocument("d1", ["Ted Cruz met Ted Cruz."], title="t")
        g = build_news_graph(doc, gaz, tf, emb)
        assert len(g.edges[PARA_ENT]) == 1
        assert np.count_nonzero(g.kinds == KIND_ENTITY) == 1

    def test_entity_attrs_are_embedding_rows(self, setup):
        _, gaz, tf, emb = setup
        doc = NewsDocument("d1", ["Elizabeth Warren and Ted Cruz debated."])
        g = build_news_graph(doc, gaz, tf, emb)
        assert list(g.entity_ids) == [0, 1]
        np.testing.assert_array_equal(g.entity_attrs, emb.entity_vectors[[0, 1]])

    def test_entity_set_matches_linker(self, setup):
        _, gaz, tf, emb = setup
        doc = NewsDocument("d1", ["Texas news.", "Ted Cruz in Texas.", "no names"])
        g = build_news_graph(doc, gaz, tf, emb)
        assert set(g.entity_ids.tolist()) == {0, 2}
        # para-ent pairs: (p1, Ted Cruz), (p0, Texas), (p1, Texas)
        assert len(g.edges[PARA_ENT]) == 3

    def test_edge_count_identities_random_docs(self, setup):
        _, gaz, tf, emb = setup
        rng = np.random.default_rng(3)
        words = ["alpha", "beta", "Ted Cruz", "Texas", "gamma", "Elizabeth Warren"]
        for trial in range(20):
            s = int(rng.integers(1, 6))
            has_title = bool(rng.integers(0, 2))
            paras = [
                " ".join(rng.choice(words, size=rng.integers(1, 6)))
                for _ in range(s)
            ]
            doc = NewsDocument(f"d{trial}", paras, title="t" if has_title else None)
            g = build_news_graph(doc, gaz, tf, emb)
            assert len(g.edges[DOC_PARA]) == s * int(has_title)
            assert len(g.edges[PARA_PARA]) == s - 1
            from stancegraph.linker import link_entities

            pairs = {
                (k, m.entity)
                for k, text in enumerate(paras)
                for m in link_entities(gaz, text)
            }
            assert len(g.edges[PARA_ENT]) == len(pairs)
            # every entity node touches at least one para-ent edge
            ent_nodes = set(g.entity_nodes.tolist())
            touched = set(g.edges[PARA_ENT][:, 1].tolist())
            assert ent_nodes == touched

    def test_missing_embedding_row_rejected(self, setup):
        kg, gaz, tf, _ = setup
        small = EmbeddingTable(np.zeros((1, 4)), np.zeros((10, 4)), 4, TRANSE)
        doc = NewsDocument("d1", ["Texas story"])
        with pytest.raises(ValueError, match="no embedding row"):
            build_news_graph(doc, gaz, tf, small)

    def test_empty_paragraphs_rejected(self):
        with pytest.raises(ValueError, match="no paragraphs"):
            NewsDocument("d1", [])


class TestBatchGraphs:
    def test_single_graph_round_trips(self):
        rng = np.random.default_rng(1)
        g = random_news_graph(rng, s=3, n_ent=2)
        batch = batch_graphs([g])
        assert batch.n_nodes == g.n_nodes
        np.testing.assert_array_equal(batch.kinds, g.kinds)
        np.testing.assert_array_equal(batch.text_attrs, g.text_attrs)
        for name in g.edges:
            np.testing.assert_array_equal(batch.edges[name], g.edges[name])

    def test_offsets(self):
        rng = np.random.default_rng(2)
        a = random_news_graph(rng, s=2, n_ent=0, title=True)   # 3 nodes
        b = random_news_graph(rng, s=3, n_ent=0, title=True)   # 4 nodes
        batch = batch_graphs([a, b])
        assert batch.n_nodes == 7
        assert batch.offsets == [0, 3]
        # second graph's first paragraph sits at global node 3 + 1
        np.testing.assert_array_equal(batch.paragraph_nodes[1], [4, 5, 6][:3])

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            batch_graphs([])

    def test_labels_and_ids_preserved(self):
        rng = np.random.default_rng(3)
        a = random_news_graph(rng, label=1, doc_id="a")
        b = random_news_graph(rng, label=0, doc_id="b")
        batch = batch_graphs([a, b])
        assert batch.labels == [1, 0]
        assert batch.doc_ids == ["a", "b"]


class TestEdgeSurgery:
    def test_keep_all_identity(self):
        rng = np.random.default_rng(4)
        g = random_news_graph(rng, s=4, n_ent=3)
        out = drop_para_ent_edges(g, 1.0, seed=0)
        np.testing.assert_array_equal(out.edges[PARA_ENT], g.edges[PARA_ENT])
        assert out.n_nodes == g.n_nodes

    def test_keep_none_drops_entities(self):
        rng = np.random.default_rng(5)
        g = random_news_graph(rng, s=4, n_ent=3)
        out = drop_para_ent_edges(g, 0.0, seed=0)
        assert len(out.edges[PARA_ENT]) == 0
        assert np.count_nonzero(out.kinds == KIND_ENTITY) == 0
        assert out.s == g.s
        np.testing.assert_array_equal(out.text_attrs, g.text_attrs)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(6)
        g = random_news_graph(rng, s=5, n_ent=4)
        a = drop_para_ent_edges(g, 0.5, seed=9)
        b = drop_para_ent_edges(g, 0.5, seed=9)
        np.testing.assert_array_equal(a.edges[PARA_ENT], b.edges[PARA_ENT])

    def test_remove_edge_type_para_para(self):
        rng = np.random.default_rng(7)
        g = random_news_graph(rng, s=4, n_ent=2)
        out = remove_edge_type(g, PARA_PARA)
        assert len(out.edges[PARA_PARA]) == 0
        np.testing.assert_array_equal(out.edges[PARA_ENT], g.edges[PARA_ENT])
        assert out.n_nodes == g.n_nodes

    def test_remove_para_ent_equals_keep_zero(self):
        rng = np.random.default_rng(8)
        g = random_news_graph(rng, s=4, n_ent=2)
        a = remove_edge_type(g, PARA_ENT)
        b = drop_para_ent_edges(g, 0.0, seed=123)
        np.testing.assert_array_equal(a.kinds, b.kinds)
        for name in a.edges:
            np.testing.assert_array_equal(a.edges[name], b.edges[name])


class TestPermuteNodes:
    def test_kinds_and_edges_follow(self):
        rng = np.random.default_rng(9)
        g = random_news_graph(rng, s=3, n_ent=2, title=True)
        perm = rng.permutation(g.n_nodes)
        p = permute_nodes(g, perm)
        assert np.count_nonzero(p.kinds == KIND_PARAGRAPH) == 3
        for name in g.edges:
            if g.edges[name].size:
                np.testing.assert_array_equal(p.edges[name], perm[g.edges[name]])
        np.testing.assert_array_equal(p.kinds[perm[g.text_nodes]], g.kinds[g.text_nodes])

    def test_invalid_permection_rejected(self):
        rng = np.random.default_rng(10)
        g = random_news_graph(rng, s=2, n_ent=1)
        with pytest.raises(ValueError, match="permutation"):
            permute_nodes(g, np.zeros(g.n_nodes, dtype=int))


class TestCorpusIO:
    def test_round_trip(self, tmp_path):
        docs = [
            NewsDocument("a", ["p0", "p1"], title="T", label=1),
            NewsDocument("b", ["solo"], title=None, label=None),
        ]
        path = tmp_path / "corpus.jsonl"
        save_corpus(path, docs)
        loaded = load_corpus(path)
        assert loaded == docs

    def test_missing_field(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a"}\n')
        with pytest.raises(ValueError, match="paragraphs"):
            load_corpus(path)

    def test_invalid_json_line_number(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"id": "a", "paragraphs": ["x"]}\nnot json\n')
        with pytest.raises(ValueError, match=":2"):
            load_corpus(path)


class TestGraphDump:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(11)
        graphs = [random_news_graph(rng, s=3, n_ent=2, doc_id=f"g{i}") for i in range(3)]
        path = tmp_path / "graphs.bin"
        save_graphs(path, graphs, d_text=7, d_e=5)
        loaded, d_text, d_e = load_graphs(path)
        assert (d_text, d_e) == (7, 5)
        assert len(loaded) == 3
        for a, b in zip(graphs, loaded):
            assert a.doc_id == b.doc_id
            assert a.s == b.s
            assert a.label == b.label
            np.testing.assert_array_equal(a.kinds, b.kinds)
            np.testing.assert_array_equal(a.text_attrs, b.text_attrs)
            np.testing.assert_array_equal(a.entity_attrs, b.entity_attrs)
            for name in a.edges:
                np.testing.assert_array_equal(a.edges[name], b.edges[name])

    def test_byte_deterministic(self, tmp_path):
        rng = np.random.default_rng(12)
        graphs = [random_news_graph(rng, s=2, n_ent=1)]
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_graphs(p1, graphs, 7, 5)
        save_graphs(p2, graphs, 7, 5)
        assert p1.read_bytes() == p2.read_bytes()
