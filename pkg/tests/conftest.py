"""Shared builders for micro instances and small trained models."""

from __future__ import annotations

import numpy as np
import pytest

from microasm.corpus import Corpus, Document, PrepOptions, Vocabulary
from microasm.lexicon import BetaPrior, SeedLexicon, build_beta
from microasm.sampler import Hyperparams


def positive_beta(S: int, V: int, rng: np.random.Generator) -> BetaPrior:
    """Strictly positive, non-uniform word prior (no seeds) for oracle comparisons."""
    beta = rng.uniform(0.05, 1.0, size=(S, V))
    beta.setflags(write=False)
    row_sum = beta.sum(axis=1)
    row_sum.setflags(write=False)
    return BetaPrior(beta, row_sum, 0.0, 0.0)


def micro_corpus(doc_pairs, V: int) -> Corpus:
    vocab = Vocabulary(f"v{i}" for i in range(V))
    docs = [Document(f"d{k}", tuple(w for p in pairs for w in p), tuple(map(tuple, pairs)))
            for k, pairs in enumerate(doc_pairs)]
    return Corpus(docs, vocab, PrepOptions(pair_window=1))


def random_micro(rng: np.random.Generator, max_docs=4, max_vocab=6, max_pairs=3):
    D = int(rng.integers(1, max_docs + 1))
    V = int(rng.integers(2, max_vocab + 1))
    doc_pairs = [[tuple(int(x) for x in rng.integers(0, V, 2)) for _ in range(int(rng.integers(1, max_pairs + 1)))]
                 for _ in range(D)]
    return micro_corpus(doc_pairs, V)


def micro_hp(beta: BetaPrior, C=2, S=2, T=2, **kw) -> Hyperparams:
    kw.setdefault("alpha", 0.3)
    kw.setdefault("gamma", 0.7)
    kw.setdefault("delta", 0.4)
    kw.setdefault("iterations", 10)
    kw.setdefault("burn_in", 0)
    return Hyperparams(beta=beta, num_clusters=C, num_sentiments=S, num_topics=T, **kw)


def seeded_corpus() -> tuple[Corpus, SeedLexicon]:
    """Tiny restaurant corpus with one positive and one negative seed."""
    words = ["good", "food", "bad", "service", "ambience", "slow", "tasty"]
    vocab = Vocabulary(words)
    ix = {w: i for i, w in enumerate(words)}
    raw = [
        ["good", "food", "tasty"],
        ["bad", "service", "slow"],
        ["good", "ambience"],
        ["food", "service"],
        ["bad", "food", "slow"],
        ["tasty", "food", "ambience", "good"],
    ]
    docs = []
    for k, toks in enumerate(raw):
        ids = tuple(ix[t] for t in toks)
        pairs = tuple((ids[i], ids[j]) for i in range(len(ids)) for j in range(i + 1, len(ids)))
        docs.append(Document(f"r{k}", ids, pairs))
    lex = SeedLexicon(frozenset({"good"}), frozenset({"bad"}))
    return Corpus(docs, vocab, PrepOptions()), lex


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def seeded():
    corpus, lex = seeded_corpus()
    beta = build_beta(lex, corpus.vocabulary)
    return corpus, lex, beta


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
