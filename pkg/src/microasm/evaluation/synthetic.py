"""Synthetic corpora drawn from the model's own generative process, with ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from microasm.corpus import NEGATIVE, POSITIVE, Corpus, Document, PrepOptions, Vocabulary, extract_pairs
from microasm.errors import BadInputError
from microasm.lexicon import SeedLexicon


@dataclass
class SyntheticSpec:
    psi: np.ndarray  # (C,)
    pi: np.ndarray  # (C, S)
    theta: np.ndarray  # (C, S, T)
    phi: np.ndarray  # (S, T, V)
    num_docs: int
    mean_pairs: float = 6.0
    seeds_pos: tuple[int, ...] = ()
    seeds_neg: tuple[int, ...] = ()
    words: tuple[str, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        self.psi, self.pi, self.theta, self.phi = (np.asarray(a, dtype=np.float64)
                                                   for a in (self.psi, self.pi, self.theta, self.phi))
        C, S, T = self.theta.shape
        if self.psi.shape != (C,) or self.pi.shape != (C, S) or self.phi.shape[:2] != (S, T):
            raise BadInputError("inconsistent synthetic distribution shapes")
        for name in ("psi", "pi", "theta", "phi"):
            arr = getattr(self, name)
            if np.any(arr < 0) or not np.allclose(arr.sum(axis=-1), 1.0, atol=1e-9):
                raise BadInputError(f"{name} rows must be probability vectors")
        if set(self.seeds_pos) & set(self.seeds_neg):
            raise BadInputError("planted seed sets overlap")
        if self.mean_pairs < 1:
            raise BadInputError("mean_pairs must be >= 1")
        if self.words is None:
            self.words = tuple(f"w{i:03d}" for i in range(self.vocab_size))

    @property
    def shape(self) -> tuple[int, int, int, int]:
        C, S, T = self.theta.shape
        return C, S, T, self.phi.shape[2]

    @property
    def vocab_size(self) -> int:
        return self.phi.shape[2]

    def lexicon(self) -> SeedLexicon:
        return SeedLexicon(frozenset(self.words[i] for i in self.seeds_pos),
                           frozenset(self.words[i] for i in self.seeds_neg))

    def pair_probability(self, c: int, w1: int, w2: int) -> float:
        """Probability of an ordered pair in a document of cluster c."""
        return float(np.sum(self.pi[c][:, None] * self.theta[c] * self.phi[:, :, w1] * self.phi[:, :, w2]))


@dataclass
class GroundTruth:
    cluster_of_doc: np.ndarray
    assign_s: np.ndarray
    assign_z: np.ndarray
    gold: list[str]
    planted_words: dict[tuple[int, int], set[int]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "cluster_of_doc": self.cluster_of_doc.tolist(),
            "assign_s": self.assign_s.tolist(),
            "assign_z": self.assign_z.tolist(),
            "gold": list(self.gold),
            "planted_words": [{"sentiment": s, "topic": z, "words": sorted(int(w) for w in ws)}
                              for (s, z), ws in sorted(self.planted_words.items())],
        }


def _categorical(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One draw per row of ``probs`` (rows sum to one)."""
    cdf = np.cumsum(probs, axis=-1)
    u = rng.random(cdf.shape[:-1])[..., None] * cdf[..., -1:]
    return np.minimum((u >= cdf).sum(axis=-1), probs.shape[-1] - 1)


def generate_synthetic(spec: SyntheticSpec) -> tuple[Corpus, GroundTruth]:
    """c_d ~ psi; per pair s ~ pi[c], z ~ theta[c, s], w1, w2 ~ phi[s, z] independently.

    Tokens are the concatenated pairs, so each pair sits at adjacent positions.
    The gold label is the majority true pair sentiment (ties go to the
    cluster's dominant sentiment).
    """
    rng = np.random.default_rng(spec.seed)
    C, S, T, V = spec.shape
    D = spec.num_docs
    clusters = _categorical(rng, np.broadcast_to(spec.psi, (D, C)))
    lengths = 1 + rng.poisson(spec.mean_pairs - 1, size=D)
    pair_doc = np.repeat(np.arange(D), lengths)
    pc = clusters[pair_doc]
    s = _categorical(rng, spec.pi[pc])
    z = _categorical(rng, spec.theta[pc, s])
    w1 = _categorical(rng, spec.phi[s, z])
    w2 = _categorical(rng, spec.phi[s, z])

    vocab = Vocabulary(spec.words)
    docs, gold = [], []
    start = 0
    for d in range(D):
        stop = start + int(lengths[d])
        pairs = tuple(zip(w1[start:stop].tolist(), w2[start:stop].tolist()))
        if S == 2:
            n_pos = int(np.sum(s[start:stop] == 0))
            n_neg = int(lengths[d]) - n_pos
            if n_pos != n_neg:
                label = POSITIVE if n_pos > n_neg else NEGATIVE
            else:
                label = POSITIVE if spec.pi[clusters[d], 0] >= spec.pi[clusters[d], 1] else NEGATIVE
        else:
            label = None
        tokens = tuple(w for p in pairs for w in p)
        docs.append(Document(f"syn{d}", tokens, pairs, label))
        gold.append(label)
        start = stop
    planted = {(a, b): set(np.flatnonzero(spec.phi[a, b] > 0).tolist()) for a in range(S) for b in range(T)}
    truth = GroundTruth(clusters.astype(np.int64), s.astype(np.int64), z.astype(np.int64), gold, planted)
    return Corpus(docs, vocab, PrepOptions(pair_window=1)), truth


def planted_spec(num_docs: int = 2000, vocab_size: int = 200, num_clusters: int = 5, num_topics: int = 5,
                 num_seeds: int = 5, seed_mass: float = 0.1, topic_focus: float = 0.8,
                 sentiment_focus: float = 0.9, mean_pairs: float = 6.0, seed: int = 0) -> SyntheticSpec:
    """A well-separated two-sentiment spec.

    Every (sentiment, topic) owns a disjoint block of the non-seed vocabulary
    holding ``1 - seed_mass`` of its word mass; the rest is spread over the
    seeds of that sentiment. Cluster c prefers topic c mod T and alternates
    its dominant sentiment.
    """
    S, T, C = 2, num_topics, num_clusters
    if vocab_size < 2 * num_seeds + S * T:
        raise BadInputError("vocabulary too small for the planted blocks")
    rng = np.random.default_rng(seed)
    seeds_pos = tuple(range(num_seeds))
    seeds_neg = tuple(range(num_seeds, 2 * num_seeds))
    blocks = np.array_split(np.arange(2 * num_seeds, vocab_size), S * T)
    phi = np.zeros((S, T, vocab_size))
    for s in range(S):
        seeds = seeds_pos if s == 0 else seeds_neg
        for z in range(T):
            block = blocks[s * T + z]
            weights = rng.uniform(0.5, 1.5, size=len(block))
            phi[s, z, block] = (1 - seed_mass) * weights / weights.sum()
            if seeds:
                phi[s, z, list(seeds)] = seed_mass / len(seeds)
            else:
                phi[s, z, block] /= phi[s, z, block].sum()
    theta = np.full((C, S, T), (1 - topic_focus) / max(T - 1, 1))
    pi = np.empty((C, S))
    for c in range(C):
        theta[c, :, c % T] = topic_focus if T > 1 else 1.0
        major = c % 2
        pi[c, major] = sentiment_focus
        pi[c, 1 - major] = 1 - sentiment_focus
    words = tuple(
        [f"pos{i}" for i in range(num_seeds)] + [f"neg{i}" for i in range(num_seeds)]
        + [f"w{i:03d}" for i in range(2 * num_seeds, vocab_size)]
    )
    return SyntheticSpec(np.full(C, 1.0 / C), pi, theta, phi, num_docs, mean_pairs,
                         seeds_pos, seeds_neg, words, seed)


def random_token_corpus(num_docs: int, mean_tokens: float = 12.0, vocab_size: int = 5000,
                        window: int = 5, zipf_exponent: float = 1.1, seed: int = 0) -> Corpus:
    """Random token sequences with Zipfian word frequencies, paired by window (for benchmarking)."""
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    p = ranks ** -zipf_exponent
    p /= p.sum()
    lengths = np.maximum(2, rng.poisson(mean_tokens, size=num_docs))
    words = rng.choice(vocab_size, size=int(lengths.sum()), p=p)
    docs = []
    start = 0
    for d, n in enumerate(lengths.tolist()):
        tokens = tuple(words[start:start + n].tolist())
        docs.append(Document(f"r{d}", tokens, tuple(extract_pairs(tokens, window))))
        start += n
    vocab = Vocabulary(f"t{i}" for i in range(vocab_size))
    return Corpus(docs, vocab, PrepOptions(pair_window=window))
