import math
from collections import Counter

import numpy as np
import pytest

from microasm.errors import BadInputError, ConfigError
from microasm.evaluation import (
    FullAssignment, SyntheticSpec, collapsed_joint_logprob, enumerate_assignments, exact_marginals,
    generate_synthetic, planted_spec,
)
from microasm.lexicon import build_beta

from conftest import micro_corpus, micro_hp, positive_beta


def small_spec(**kw):
    rng = np.random.default_rng(4)
    C, S, T, V = 2, 2, 2, 4
    base = dict(
        psi=np.array([0.3, 0.7]),
        pi=rng.dirichlet(np.ones(S), size=C),
        theta=rng.dirichlet(np.ones(T), size=(C, S)),
        phi=rng.dirichlet(np.ones(V), size=(S, T)),
        num_docs=500,
    )
    base.update(kw)
    return SyntheticSpec(**base)


class TestGenerator:
    def test_degenerate_psi(self):
        corpus, truth = generate_synthetic(small_spec(psi=np.array([1.0, 0.0])))
        assert np.all(truth.cluster_of_doc == 0)
        assert corpus.num_documents == 500

    def test_degenerate_phi(self):
        phi = np.zeros((2, 2, 4))
        phi[:, :, 2] = 1.0
        corpus, _ = generate_synthetic(small_spec(phi=phi))
        assert all(p == (2, 2) for d in corpus.documents for p in d.pairs)

    def test_pair_frequencies_within_three_sigma(self):
        spec = small_spec(psi=np.array([1.0, 0.0]), num_docs=21_000, mean_pairs=5.0)
        corpus, _ = generate_synthetic(spec)
        counts = Counter(p for d in corpus.documents for p in d.pairs)
        n = sum(counts.values())
        assert n >= 100_000
        V = spec.vocab_size
        for w1 in range(V):
            for w2 in range(V):
                p = spec.pair_probability(0, w1, w2)
                sigma = math.sqrt(n * p * (1 - p))
                assert abs(counts[(w1, w2)] - n * p) <= 3 * sigma

    def test_invalid_spec(self):
        with pytest.raises(BadInputError):
            small_spec(psi=np.array([0.5, 0.6]))
        with pytest.raises(BadInputError):
            small_spec(seeds_pos=(1,), seeds_neg=(1,))

    def test_planted_spec_shape_and_seeds(self):
        spec = planted_spec(num_docs=100, vocab_size=50, num_clusters=3, num_topics=2, num_seeds=2)
        corpus, truth = generate_synthetic(spec)
        lex = spec.lexicon()
        assert lex.positive == {"pos0", "pos1"} and lex.negative == {"neg0", "neg1"}
        beta = build_beta(lex, corpus.vocabulary)
        # planted seed sets agree with pair sentiment, so true assignments have finite joint
        for d, doc in enumerate(corpus.documents):
            assert doc.gold in ("pos", "neg")
        s = truth.assign_s
        w1, w2, _ = corpus.pair_arrays()
        assert np.all(beta.beta[s, w1] > 0) and np.all(beta.beta[s, w2] > 0)
        assert set(truth.planted_words) == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_deterministic(self):
        a = generate_synthetic(small_spec(seed=3))[1]
        b = generate_synthetic(small_spec(seed=3))[1]
        assert np.array_equal(a.assign_z, b.assign_z)


class TestOracle:
    def test_single_pair_closed_form(self, rng):
        for w1, w2 in ((0, 1), (2, 2)):
            corpus = micro_corpus([[(w1, w2)]], 3)
            beta = positive_beta(1, 3, rng)
            hp = micro_hp(beta, C=1, S=1, T=1)
            b, bs = beta.beta[0], beta.beta_row_sum[0]
            expected = math.log(b[w1] / bs * (b[w2] + (w1 == w2)) / (bs + 1))
            got = collapsed_joint_logprob(corpus, hp, FullAssignment((0,), ((0, 0),)))
            assert got == pytest.approx(expected, rel=1e-12)

    def test_label_permutations(self, rng):
        corpus = micro_corpus([[(0, 1), (1, 2)], [(2, 3)], [(0, 3), (3, 3)]], 4)
        hp = micro_hp(positive_beta(2, 4, rng), C=3, T=3)
        a = FullAssignment((0, 2, 2), ((0, 1), (1, 2), (0, 0), (1, 1), (0, 1)))
        base = collapsed_joint_logprob(corpus, hp, a)
        cperm = {0: 1, 1: 2, 2: 0}
        b = FullAssignment(tuple(cperm[c] for c in a.clusters), a.pairs)
        assert collapsed_joint_logprob(corpus, hp, b) == pytest.approx(base, rel=1e-12)
        tperm = {0: 2, 1: 0, 2: 1}  # topic relabel within sentiment 1 only
        c = FullAssignment(a.clusters, tuple((s, tperm[z] if s == 1 else z) for s, z in a.pairs))
        assert collapsed_joint_logprob(corpus, hp, c) == pytest.approx(base, rel=1e-12)

    def test_zero_prior_is_minus_inf(self):
        from microasm.lexicon import SeedLexicon
        corpus = micro_corpus([[(0, 1)]], 2)
        beta = build_beta(SeedLexicon(frozenset({"v0"}), frozenset()), corpus.vocabulary)
        hp = micro_hp(beta, C=1, T=1)
        assert collapsed_joint_logprob(corpus, hp, FullAssignment((0,), ((1, 0),))) == -math.inf

    def test_enumeration_sums_to_one_and_cap(self, rng):
        corpus = micro_corpus([[(0, 1)], [(1, 2), (2, 2)]], 3)
        hp = micro_hp(positive_beta(2, 3, rng), C=2, T=2)
        ex = exact_marginals(corpus, hp, doc=1, pair=2)
        assert ex.cluster_marginal.sum() == pytest.approx(1.0)
        assert ex.pair_marginal.sum() == pytest.approx(1.0)
        assert sum(1 for _ in enumerate_assignments(corpus, hp)) == 2 ** 2 * 4 ** 3
        with pytest.raises(ConfigError):
            next(enumerate_assignments(corpus, hp, cap=10))

    def test_mismatched_assignment(self, rng):
        corpus = micro_corpus([[(0, 1)]], 2)
        hp = micro_hp(positive_beta(2, 2, rng))
        with pytest.raises(ConfigError):
            collapsed_joint_logprob(corpus, hp, FullAssignment((0, 1), ((0, 0),)))
