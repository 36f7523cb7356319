"""Exact collapsed joint and brute-force enumeration for micro instances.

Deliberately written with plain Python counters and math.lgamma so it shares
no code with the sampler's count tensors.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.special import logsumexp

from microasm.corpus import Corpus
from microasm.errors import ConfigError

DEFAULT_ENUMERATION_CAP = 50_000


@dataclass(frozen=True)
class FullAssignment:
    clusters: tuple[int, ...]  # one per document
    pairs: tuple[tuple[int, int], ...]  # (sentiment, topic) per pair, documents in order


def _doc_pairs(corpus) -> list[list[tuple[int, int]]]:
    if isinstance(corpus, Corpus):
        return [list(d.pairs) for d in corpus.documents]
    return [list(p) for p in corpus]


def _dm_log(counts: dict, prior, prior_sum: float, support: Sequence) -> float:
    """log Dirichlet-multinomial marginal of ``counts`` (sequence probability)."""
    n = sum(counts.values())
    out = math.lgamma(prior_sum) - math.lgamma(prior_sum + n)
    for k in support:
        m = counts.get(k, 0)
        if m == 0:
            continue
        a = prior(k)
        if a == 0:
            return -math.inf
        out += math.lgamma(a + m) - math.lgamma(a)
    return out


def collapsed_joint_logprob(corpus, hp, assignment: FullAssignment) -> float:
    """log p(w, c, s, z) with psi, pi, theta and phi integrated out.

    ``corpus`` is a Corpus or a list of per-document pair lists. Returns -inf when
    a word is assigned to a (sentiment, topic) whose prior mass for it is zero.
    """
    C, S, T = hp.num_clusters, hp.num_sentiments, hp.num_topics
    beta = np.asarray(hp.beta.beta)
    V = beta.shape[1]
    docs = _doc_pairs(corpus)
    if len(assignment.clusters) != len(docs) or len(assignment.pairs) != sum(map(len, docs)):
        raise ConfigError("assignment does not match the corpus")

    n_c, n_cs, n_cst, n_stw = Counter(), Counter(), Counter(), Counter()
    it = iter(assignment.pairs)
    for doc, c in zip(docs, assignment.clusters):
        n_c[c] += 1
        for (w1, w2) in doc:
            s, z = next(it)
            n_cs[c, s] += 1
            n_cst[c, s, z] += 1
            n_stw[s, z, w1] += 1
            n_stw[s, z, w2] += 1

    lp = _dm_log(n_c, lambda k: hp.delta, C * hp.delta, range(C))
    for c in range(C):
        lp += _dm_log({s: n_cs[c, s] for s in range(S)}, lambda k: hp.gamma, S * hp.gamma, range(S))
        for s in range(S):
            lp += _dm_log({z: n_cst[c, s, z] for z in range(T)}, lambda k: hp.alpha, T * hp.alpha, range(T))
    for s in range(S):
        row = beta[s]
        row_sum = float(row.sum())
        for z in range(T):
            counts = {w: n_stw[s, z, w] for w in range(V) if n_stw[s, z, w]}
            lp += _dm_log(counts, lambda w: float(row[w]), row_sum, sorted(counts))
    return lp


def enumerate_assignments(corpus, hp, cap: int | None = DEFAULT_ENUMERATION_CAP) -> Iterator[FullAssignment]:
    docs = _doc_pairs(corpus)
    C, S, T = hp.num_clusters, hp.num_sentiments, hp.num_topics
    n_pairs = sum(map(len, docs))
    total = C ** len(docs) * (S * T) ** n_pairs
    if cap is not None and total > cap:
        raise ConfigError(f"{total} assignments exceed the enumeration cap of {cap}")
    pair_values = [(s, z) for s in range(S) for z in range(T)]
    for clusters in itertools.product(range(C), repeat=len(docs)):
        for pairs in itertools.product(pair_values, repeat=n_pairs):
            yield FullAssignment(clusters, pairs)


@dataclass
class ExactPosterior:
    cluster_marginal: np.ndarray  # (C,) for the chosen document
    pair_marginal: np.ndarray  # (S, T) for the chosen pair
    log_normalizer: float


def exact_marginals(corpus, hp, doc: int = 0, pair: int = 0,
                    cap: int | None = DEFAULT_ENUMERATION_CAP) -> ExactPosterior:
    """Exact posterior marginals of one document's cluster and one pair's
    (sentiment, topic); ``pair`` is a flat index over all pairs.

    Sums are reduced in enumeration order (log-sum-exp), so results are deterministic.
    """
    C, S, T = hp.num_clusters, hp.num_sentiments, hp.num_topics
    logs, cl, pr = [], [], []
    for a in enumerate_assignments(corpus, hp, cap):
        logs.append(collapsed_joint_logprob(corpus, hp, a))
        cl.append(a.clusters[doc])
        s, z = a.pairs[pair]
        pr.append(s * T + z)
    logs = np.array(logs)
    cl, pr = np.array(cl), np.array(pr)
    log_z = logsumexp(logs)
    weights = np.exp(logs - log_z)
    cluster_marginal = np.bincount(cl, weights=weights, minlength=C)
    pair_marginal = np.bincount(pr, weights=weights, minlength=S * T).reshape(S, T)
    return ExactPosterior(cluster_marginal, pair_marginal, float(log_z))


def _normalize_logs(logs: np.ndarray) -> np.ndarray:
    if not np.isfinite(logs.max()):
        return np.full(logs.shape, 1.0 / logs.size)
    p = np.exp(logs - logs.max())
    return p / p.sum()


def cluster_conditional_from_joint(corpus, hp, assignment: FullAssignment, d: int) -> np.ndarray:
    """p(c_d = l | rest) as ratios of the joint over the C completions."""
    logs = np.array([
        collapsed_joint_logprob(corpus, hp, FullAssignment(
            assignment.clusters[:d] + (l,) + assignment.clusters[d + 1:], assignment.pairs))
        for l in range(hp.num_clusters)
    ])
    return _normalize_logs(logs)


def pair_conditional_from_joint(corpus, hp, assignment: FullAssignment, i: int) -> np.ndarray:
    """p(s_i = j, z_i = k | rest) over (S, T) for flat pair index i."""
    S, T = hp.num_sentiments, hp.num_topics
    logs = np.array([
        collapsed_joint_logprob(corpus, hp, FullAssignment(
            assignment.clusters, assignment.pairs[:i] + ((j, k),) + assignment.pairs[i + 1:]))
        for j in range(S) for k in range(T)
    ])
    return _normalize_logs(logs).reshape(S, T)
