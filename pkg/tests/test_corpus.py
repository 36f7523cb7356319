import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from microasm.corpus import (
    DEFAULT_NEGATORS, PrepOptions, RawDocument, apply_negation, build_corpus, corpus_from_dict,
    corpus_to_dict, dumps, extract_pairs, load_corpus, read_jsonl, read_plain, save_corpus, tokenize,
)
from microasm.errors import BadInputError, EmptyCorpusError, VersionMismatchError

words = st.text(alphabet="abcdefgh", min_size=1, max_size=4)
token_lists = st.lists(words, max_size=25)


class TestTokenize:
    def test_basic(self):
        assert tokenize("Great food!") == ["great", "food"]

    def test_empty(self):
        assert tokenize("") == []

    def test_stopwords(self):
        assert tokenize("The pasta was bad", stopwords={"the", "was"}) == ["pasta", "bad"]

    def test_keep_case(self):
        assert tokenize("Great Food", lowercase=False) == ["Great", "Food"]

    def test_contraction_collapses(self):
        assert tokenize("I didn't like it") == ["i", "didnt", "like", "it"]


class TestNegation:
    def test_prefixes_following_tokens(self):
        assert apply_negation(["not", "like", "movie"], window=5) == ["not_like", "not_movie"]

    def test_no_negator(self):
        assert apply_negation(["good"], window=5) == ["good"]

    def test_double_negation_cancels(self):
        assert apply_negation(["not", "not", "good"], window=5) == ["good"]

    def test_window_limits_scope(self):
        assert apply_negation(["not", "a", "b", "c"], window=2) == ["not_a", "not_b", "c"]

    def test_prefixed_token_toggles_back(self):
        assert apply_negation(["never", "not_good"]) == ["good"]

    def test_bad_window(self):
        with pytest.raises(ValueError):
            apply_negation(["a"], window=0)

    @given(token_lists)
    def test_identity_without_negators(self, toks):
        toks = [t for t in toks if t not in DEFAULT_NEGATORS]
        assert apply_negation(toks) == toks

    @given(token_lists, st.integers(1, 8))
    def test_negators_removed(self, toks, window):
        toks = toks + ["not"]
        out = apply_negation(toks, window=window)
        assert not set(out) & DEFAULT_NEGATORS
        assert len(out) == sum(t not in DEFAULT_NEGATORS for t in toks)


class TestPairs:
    def test_all_within_window(self):
        assert extract_pairs(["a", "b", "c"], 5) == [("a", "b"), ("a", "c"), ("b", "c")]

    def test_window_one(self):
        assert extract_pairs(["a", "b", "c"], 1) == [("a", "b"), ("b", "c")]

    def test_single_token(self):
        assert extract_pairs(["a"], 3) == []

    def test_duplicates_kept(self):
        assert extract_pairs(["a", "a"], 2) == [("a", "a")]

    @given(token_lists, st.integers(1, 8))
    def test_count_bound(self, toks, window):
        n = len(toks)
        pairs = extract_pairs(toks, window)
        assert len(pairs) <= n * window
        if n <= window + 1:
            assert len(pairs) == n * (n - 1) // 2


def raw(i, text, **kw):
    return RawDocument(str(i), text, **kw)


class TestBuildCorpus:
    def test_shared_vocabulary(self):
        c = build_corpus([raw(0, "tasty food"), raw(1, "cold food")])
        assert c.vocab_size == 3
        assert c.stats()["vocab_size"] == 3

    def test_rating_thresholds(self):
        c = build_corpus([raw(0, "awful place", rating=2)], PrepOptions(rating_threshold=3))
        assert c.documents[0].gold == "neg"
        c = build_corpus([raw(0, "fine place", rating=7)], PrepOptions(rating_threshold=5))
        assert c.documents[0].gold == "pos"

    def test_explicit_label_wins(self):
        c = build_corpus([raw(0, "fine place", label="neg", rating=5)])
        assert c.documents[0].gold == "neg"

    def test_zero_pair_documents_dropped(self):
        c = build_corpus([raw(0, "hello"), raw(1, "good food here")])
        assert [d.id for d in c.documents] == ["1"]
        assert [d.id for d in c.dropped] == ["0"]

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpusError):
            build_corpus([raw(0, "single"), raw(1, "word")])
        with pytest.raises(EmptyCorpusError):
            build_corpus([])

    def test_empty_text_rejected(self):
        with pytest.raises(BadInputError):
            RawDocument("x", "   ")

    def test_pairs_respect_window_and_order(self):
        c = build_corpus([raw(0, "a b c d e f g h")], PrepOptions(pair_window=2))
        doc = c.documents[0]
        pos = {t: i for i, t in enumerate(doc.tokens)}
        for a, b in doc.pairs:
            assert 0 < pos[b] - pos[a] <= 2

    def test_pretokenized(self):
        c = build_corpus([raw(0, "not_good x-y z")], PrepOptions(pretokenized=True))
        assert c.decode(c.documents[0]) == ["not_good", "x-y", "z"]

    @given(st.lists(st.lists(words, min_size=2, max_size=8).map(" ".join), min_size=1, max_size=6))
    @settings(max_examples=50)
    def test_round_trip_and_determinism(self, texts):
        docs = [raw(i, t) for i, t in enumerate(texts)]
        a, b = build_corpus(docs), build_corpus(docs)
        assert dumps(corpus_to_dict(a)) == dumps(corpus_to_dict(b))
        for doc in a.documents:
            for t in doc.tokens:
                assert a.vocabulary.index(a.vocabulary.word(t)) == t
        again = corpus_from_dict(json.loads(dumps(corpus_to_dict(a))))
        assert dumps(corpus_to_dict(again)) == dumps(corpus_to_dict(a))


class TestIO:
    def test_jsonl_lenient_and_strict(self, tmp_path):
        p = tmp_path / "in.jsonl"
        p.write_text('{"id":"a","text":"good food"}\n{broken\n{"id":"b","text":"bad food","rating":1}\n')
        docs = read_jsonl(p)
        assert [d.id for d in docs] == ["a", "b"]
        with pytest.raises(BadInputError, match=":2:"):
            read_jsonl(p, strict=True)

    def test_plain(self, tmp_path):
        p = tmp_path / "in.txt"
        p.write_text("good food\n\nbad food\n")
        assert [d.text for d in read_plain(p)] == ["good food", "bad food"]

    def test_save_load_bytes(self, tmp_path):
        c = build_corpus([raw(0, "good food here"), raw(1, "x")])
        save_corpus(c, tmp_path / "a.json")
        save_corpus(load_corpus(tmp_path / "a.json"), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_unknown_version(self, tmp_path):
        c = build_corpus([raw(0, "good food here")])
        d = corpus_to_dict(c)
        d["version"] = 99
        (tmp_path / "v.json").write_text(json.dumps(d))
        with pytest.raises(VersionMismatchError):
            load_corpus(tmp_path / "v.json")
