import math

import numpy as np
import pytest

from vizsig.corpus import FigureMeta
from vizsig.errors import VizsigError
from vizsig.topics import (
    TermDocMatrix,
    build_term_doc,
    exemplar_docs,
    nmf_fit,
    top_keywords,
    topic_share_by_year,
    write_topic_report_csv,
)


def fig(fid, caption, year=2015):
    return FigureMeta(fid, f"p-{fid}", "cs", year, caption)


def tfidf_oracle(docs):
    """Loop-based reference: tf * ln(N/df), rows L2-normalized."""
    n = len(docs)
    tfs = []
    for text in docs:
        tf = {}
        for tok in text.split():
            tf[tok] = tf.get(tok, 0) + 1
        tfs.append(tf)
    vocab = sorted({t for tf in tfs for t in tf})
    df = {t: sum(1 for tf in tfs if t in tf) for t in vocab}
    rows = []
    for tf in tfs:
        row = [tf.get(t, 0) * math.log(n / df[t]) for t in vocab]
        norm = math.sqrt(sum(v * v for v in row))
        rows.append([v / norm for v in row] if norm else row)
    return vocab, rows


class TestBuildTermDoc:
    def test_ubiquitous_term_zeroed(self):
        tdm = build_term_doc([fig("f1", "cat dog"), fig("f2", "cat")])
        assert tdm.vocabulary == ("cat", "dog")
        cat_col = tdm.weights[:, 0]
        assert np.all(cat_col == 0)
        # the cat-only doc became an all-zero row and was dropped
        assert tdm.doc_ids == ("f1",)
        assert tdm.dropped_docs == ("f2",)

    def test_single_doc_degenerate_idf(self):
        with pytest.raises(VizsigError, match="degenerate idf"):
            build_term_doc([fig("f1", "cat dog")])
        tdm = build_term_doc([fig("f1", "cat cat dog")], fallback_raw_tf=True)
        assert tdm.doc_ids == ("f1",)
        # raw tf fallback keeps relative frequencies
        cat = tdm.weights[0, tdm.vocabulary.index("cat")]
        dog = tdm.weights[0, tdm.vocabulary.index("dog")]
        assert cat == pytest.approx(2 * dog)

    def test_matches_hand_tfidf(self):
        captions = ["cat dog", "cat fish", "dog dog bird"]
        tdm = build_term_doc([fig(f"f{i}", c) for i, c in enumerate(captions)])
        vocab, rows = tfidf_oracle(captions)
        assert tdm.vocabulary == tuple(vocab)
        assert np.allclose(tdm.weights, np.array(rows), atol=1e-12)

    def test_empty_captions_dropped(self):
        tdm = build_term_doc([fig("f1", "cat dog"), fig("f2", ""), fig("f3", None), fig("f4", "dog fish")])
        assert set(tdm.dropped_docs) == {"f2", "f3"}

    def test_all_empty_errors(self):
        with pytest.raises(VizsigError, match="caption"):
            build_term_doc([fig("f1", ""), fig("f2", None)])

    def test_rows_l2_normalized(self):
        tdm = build_term_doc(
            [fig("f1", "aa bb cc"), fig("f2", "aa dd"), fig("f3", "ee ff bb")]
        )
        norms = np.sqrt((tdm.weights**2).sum(axis=1))
        assert np.allclose(norms, 1.0, atol=1e-12)


def rank1_matrix():
    return TermDocMatrix(
        vocabulary=("ta", "tb", "tc"),
        weights=np.outer([1.0, 2.0], [1.0, 1.0, 2.0]),
        doc_ids=("d0", "d1"),
        doc_years=(2014, 2015),
    )


class TestNmf:
    def test_rank1_recovery(self):
        model = nmf_fit(rank1_matrix(), topics=1, seed=0, max_iter=500, tol=1e-12)
        assert model.objective_trace[-1] <= 1e-3

    def test_objective_non_increasing_random_inputs(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            docs, terms = int(rng.integers(4, 20)), int(rng.integers(4, 15))
            weights = rng.random((docs, terms))
            tdm = TermDocMatrix(
                vocabulary=tuple(f"t{i}" for i in range(terms)),
                weights=weights,
                doc_ids=tuple(f"d{i}" for i in range(docs)),
                doc_years=tuple(2010 + i % 5 for i in range(docs)),
            )
            model = nmf_fit(tdm, topics=3, seed=trial, max_iter=100, tol=0.0)
            trace = np.array(model.objective_trace)
            assert np.all(np.diff(trace) <= 1e-9 * np.maximum(1.0, trace[:-1]))

    def test_factors_stay_non_negative(self):
        rng = np.random.default_rng(1)
        tdm = TermDocMatrix(
            vocabulary=tuple(f"t{i}" for i in range(6)),
            weights=rng.random((8, 6)),
            doc_ids=tuple(f"d{i}" for i in range(8)),
            doc_years=(2015,) * 8,
        )
        model = nmf_fit(tdm, topics=2, seed=0)
        assert np.all(model.w >= 0)
        assert np.all(model.h >= 0)

    def test_seed_determinism(self):
        m1 = nmf_fit(rank1_matrix(), topics=1, seed=3)
        m2 = nmf_fit(rank1_matrix(), topics=1, seed=3)
        assert np.array_equal(m1.w, m2.w) and np.array_equal(m1.h, m2.h)

    def test_invalid_topics(self):
        with pytest.raises(ValueError):
            nmf_fit(rank1_matrix(), topics=0)
        with pytest.raises(ValueError):
            nmf_fit(rank1_matrix(), topics=3)  # min(docs, terms) = 2


def planted_two_topic_corpus(docs_per_topic=30, seed=0):
    rng = np.random.default_rng(seed)
    group_a = ["accuracy", "benchmark", "score"]
    group_b = ["lexicon", "grammar", "syntax"]
    figures = []
    for i in range(docs_per_topic):
        words = [group_a[int(k)] for k in rng.integers(0, 3, size=6)]
        figures.append(fig(f"a{i}", " ".join(words), year=2014))
    for i in range(docs_per_topic):
        words = [group_b[int(k)] for k in rng.integers(0, 3, size=6)]
        figures.append(fig(f"b{i}", " ".join(words), year=2016))
    return figures, group_a, group_b


class TestPlantedTopics:
    def test_keyword_groups_recovered(self):
        figures, group_a, group_b = planted_two_topic_corpus()
        tdm = build_term_doc(figures)
        model = nmf_fit(tdm, topics=2, seed=1, max_iter=300)
        tops = [set(top_keywords(model, t, 3)) for t in range(2)]
        assert {frozenset(group_a), frozenset(group_b)} == {
            frozenset(t) for t in tops
        }

    def test_share_by_year_planted_schedule(self):
        figures, _, _ = planted_two_topic_corpus()
        tdm = build_term_doc(figures)
        model = nmf_fit(tdm, topics=2, seed=1, max_iter=300)
        shares = topic_share_by_year(model)
        assert set(shares) == {2014, 2016}
        for year, vec in shares.items():
            assert vec.sum() == pytest.approx(1.0)
            assert vec.max() == pytest.approx(1.0)  # each year is one pure topic
        assert shares[2014].argmax() != shares[2016].argmax()


class TestTopKeywords:
    def test_descending_order(self):
        model = _manual_model(np.array([[0.1, 0.9, 0.5]]))
        assert top_keywords(model, 0, 3) == ["tb", "tc", "ta"]

    def test_tie_alphabetical(self):
        model = _manual_model(np.array([[0.5, 0.5, 0.1]]), vocab=("beta", "alpha", "zz"))
        assert top_keywords(model, 0, 2) == ["alpha", "beta"]

    def test_count_validation(self):
        model = _manual_model(np.array([[0.5, 0.2, 0.1]]))
        with pytest.raises(ValueError):
            top_keywords(model, 0, 4)
        with pytest.raises(ValueError):
            top_keywords(model, 1, 1)


def _manual_model(h, vocab=None):
    from vizsig.topics import TopicModel

    topics, terms = h.shape
    vocab = vocab or tuple(f"t{chr(97 + i)}" for i in range(terms))
    return TopicModel(
        w=np.ones((2, topics)),
        h=h,
        objective_trace=(1.0,),
        vocabulary=tuple(vocab),
        doc_ids=("d0", "d1"),
        doc_years=(2015, 2016),
    )


def test_scale_ambiguity_does_not_change_rankings():
    figures, _, _ = planted_two_topic_corpus()
    tdm = build_term_doc(figures)
    model = nmf_fit(tdm, topics=2, seed=5)
    normalized = model.h_normalized()
    assert np.allclose(normalized.sum(axis=1), 1.0)
    for t in range(2):
        assert list(np.argsort(-model.h[t])) == list(np.argsort(-normalized[t]))


def test_share_one_doc_per_topic_same_year():
    from vizsig.topics import TopicModel

    model = TopicModel(
        w=np.array([[1.0, 0.0], [0.0, 1.0]]),
        h=np.ones((2, 3)),
        objective_trace=(1.0,),
        vocabulary=("ta", "tb", "tc"),
        doc_ids=("d0", "d1"),
        doc_years=(2017, 2017),
    )
    shares = topic_share_by_year(model)
    assert np.allclose(shares[2017], [0.5, 0.5])


def test_share_vectors_handle_all_docs_one_topic():
    tdm = TermDocMatrix(
        vocabulary=("ta", "tb"),
        weights=np.array([[1.0, 0.0], [0.9, 0.0]]),
        doc_ids=("d0", "d1"),
        doc_years=(2015, 2015),
    )
    model = nmf_fit(tdm, topics=1, seed=0)
    shares = topic_share_by_year(model)
    assert np.allclose(shares[2015], [1.0])


def test_exemplars_and_report(tmp_path):
    figures, _, _ = planted_two_topic_corpus(docs_per_topic=10)
    tdm = build_term_doc(figures)
    model = nmf_fit(tdm, topics=2, seed=2)
    ex = exemplar_docs(model, 0, count=2)
    assert len(ex) == 2 and all(e in tdm.doc_ids for e in ex)
    path = tmp_path / "topics.csv"
    write_topic_report_csv(model, path, keywords=3, comment="topics=2")
    lines = path.read_text().splitlines()
    assert lines[0] == "# topics=2"
    assert lines[1].startswith("topic,keywords,exemplars,2014,2016")
    assert len(lines) == 4
