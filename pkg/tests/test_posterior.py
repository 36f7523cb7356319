import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from microasm.corpus import Vocabulary
from microasm.errors import BadInputError
from microasm.lexicon import SeedLexicon, build_beta
from microasm.posterior import (
    UNCLASSIFIABLE, PosteriorView, aspect_probs, classify_document, classify_probs, doc_aspect_given_sentiment,
    doc_sentiment, posterior, rank_words, sentiment_probs, top_terms, word_prob,
)
from microasm.sampler import FoldInResult, Hyperparams, initialize, train


def test_sentiment_examples():
    np.testing.assert_allclose(sentiment_probs([3, 1], 1.0), [4 / 6, 2 / 6], rtol=0, atol=0)
    assert sentiment_probs([0, 0], 1.0).tolist() == [0.5, 0.5]
    assert sentiment_probs([10, 10], 1.0).tolist() == [0.5, 0.5]


def test_aspect_examples():
    np.testing.assert_allclose(aspect_probs(np.zeros(15), 0.1), np.full(15, 1 / 15), rtol=1e-15)
    assert aspect_probs([2, 0], 0.1).tolist() == [2.1 / 2.2, 0.1 / 2.2]


@given(st.lists(st.integers(0, 50), min_size=2, max_size=5), st.floats(0.01, 5), st.data())
def test_sentiment_monotone_and_normalized(counts, gamma, data):
    p = sentiment_probs(counts, gamma)
    assert abs(p.sum() - 1) <= 1e-12
    s = data.draw(st.integers(0, len(counts) - 1))
    bumped = list(counts)
    bumped[s] += 1
    assert sentiment_probs(bumped, gamma)[s] > p[s]


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(1e-3, 1e3))
def test_classification_scale_invariant(a, b, k):
    assert classify_probs([a, b]).label == classify_probs([a * k, b * k]).label


def test_decision_rule():
    assert classify_probs([0.7, 0.3]).label == "pos"
    tie = classify_probs([0.5, 0.5])
    assert tie.label == "pos" and tie.tie
    assert classify_probs([0.2, 0.8]).label == "neg"
    assert not classify_probs([0.2, 0.8]).tie


def test_unclassifiable_fold_in(seeded):
    _, _, beta = seeded
    hp = Hyperparams(beta=beta)
    assert classify_document(FoldInResult(None, None), hp) is UNCLASSIFIABLE
    assert UNCLASSIFIABLE.to_record("x")["label"] == "unclassifiable"


@pytest.fixture
def untrained(seeded):
    corpus, lex, beta = seeded
    hp = Hyperparams(beta=beta, num_clusters=2, num_topics=2, iterations=0, burn_in=0)
    state = initialize(corpus, hp, np.random.default_rng(0))
    state.n_stw[...] = 0
    state.n_st[...] = 0
    return corpus, hp, state


def test_word_prob_prior_only(untrained):
    corpus, hp, state = untrained
    for s in range(2):
        p = word_prob(state, hp, s, 0)
        np.testing.assert_allclose(p, hp.beta.beta[s] / hp.beta.beta_row_sum[s], rtol=1e-15)
    bad = corpus.vocabulary.index("bad")
    assert word_prob(state, hp, 0, 1)[bad] == 0.0


def test_top1_on_prior_is_lowest_seed(untrained):
    corpus, hp, state = untrained
    view = posterior(state, hp)
    tt = top_terms(view, corpus.vocabulary, 1)
    assert tt.terms[(0, 0)][0][0] == "good"
    assert tt.terms[(1, 1)][0][0] == "bad"


def test_top_terms_full_ranking_and_ties():
    assert rank_words(np.array([0.1, 0.3, 0.3, 0.2, 0.1]), 5).tolist() == [1, 2, 3, 0, 4]
    vocab = Vocabulary(["a", "b", "c"])
    phi = np.array([[[0.2, 0.4, 0.4]]])
    view = PosteriorView(np.ones((1, 1)), np.ones((1, 1, 1)), phi, "point-estimate")
    tt = top_terms(view, vocab, 3)
    assert [w for w, _ in tt.terms[(0, 0)]] == ["b", "c", "a"]
    assert list(tt.rows())[0] == (0, 0, 1, "b", 0.4)
    with pytest.raises(BadInputError):
        top_terms(view, vocab, 0)


def test_trained_posterior_normalized_with_exact_zeros(seeded):
    corpus, _, beta = seeded
    hp = Hyperparams(beta=beta, num_clusters=3, num_topics=2, iterations=30, burn_in=10)
    state, _ = train(corpus, hp)
    for pe in (False, True):
        view = posterior(state, hp, point_estimate=pe, cluster_posterior=True)
        assert view.source == ("point-estimate" if pe else "averaged")
        for arr in (view.doc_sentiment, view.doc_aspect, view.word_given_sent_topic,
                    view.cluster_sentiment, view.cluster_aspect):
            assert np.all(arr >= 0)
            assert np.max(np.abs(arr.sum(axis=-1) - 1)) <= 1e-12
        zero = hp.beta.beta == 0
        for z in range(2):
            assert np.all(view.word_given_sent_topic[:, z][zero] == 0.0)
    d = 0
    np.testing.assert_array_equal(doc_sentiment(state, hp, d), posterior(state, hp).doc_sentiment[d])
    np.testing.assert_array_equal(doc_aspect_given_sentiment(state, hp, d, 1), posterior(state, hp).doc_aspect[d, 1])
    with pytest.raises(BadInputError):
        doc_sentiment(state, hp, 99)
    label = classify_document(state, hp, 0)
    assert label.label in ("pos", "neg")


def test_seeded_documents_classified_by_seed():
    # one document per polarity; seeds pin the sentiment from the start
    from microasm.corpus import Corpus, Document, PrepOptions
    vocab = Vocabulary(["good", "bad", "x", "y"])
    docs = [Document("p", (0, 2, 3), ((0, 2), (0, 3))), Document("n", (1, 2, 3), ((1, 2), (1, 3)))]
    corpus = Corpus(docs, vocab, PrepOptions())
    beta = build_beta(SeedLexicon(frozenset({"good"}), frozenset({"bad"})), vocab)
    hp = Hyperparams(beta=beta, num_clusters=2, num_topics=2, iterations=5, burn_in=1)
    state, _ = train(corpus, hp)
    assert classify_document(state, hp, 0).label == "pos"
    assert classify_document(state, hp, 1).label == "neg"
