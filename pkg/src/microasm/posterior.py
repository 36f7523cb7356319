"""Posterior estimates from a trained state: P(s|d), P(z|s,d), P(w|s,z) and what derives from them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from microasm.corpus import NEGATIVE, POSITIVE, Vocabulary
from microasm.errors import BadInputError, ConfigError
from microasm.sampler import FoldInResult, Hyperparams, ModelState


def sentiment_probs(n_ds: np.ndarray, gamma: float) -> np.ndarray:
    """(n_ds + gamma) / (n_d + S gamma) along the last axis."""
    n_ds = np.asarray(n_ds, dtype=np.float64)
    S = n_ds.shape[-1]
    return (n_ds + gamma) / (n_ds.sum(axis=-1, keepdims=True) + S * gamma)


def aspect_probs(n_dst: np.ndarray, alpha: float) -> np.ndarray:
    """(n_dsz + alpha) / (n_ds + T alpha); the denominator is the pair total within sentiment s."""
    n_dst = np.asarray(n_dst, dtype=np.float64)
    T = n_dst.shape[-1]
    return (n_dst + alpha) / (n_dst.sum(axis=-1, keepdims=True) + T * alpha)


def word_probs(n_stw: np.ndarray, n_st: np.ndarray, beta: np.ndarray, beta_row_sum: np.ndarray) -> np.ndarray:
    n_stw = np.asarray(n_stw, dtype=np.float64)
    return (n_stw + beta[:, None, :]) / (np.asarray(n_st, dtype=np.float64)[:, :, None] + beta_row_sum[:, None, None])


@dataclass(frozen=True)
class PosteriorView:
    doc_sentiment: np.ndarray  # (D, S)
    doc_aspect: np.ndarray  # (D, S, T)
    word_given_sent_topic: np.ndarray  # (S, T, V)
    source: str  # "averaged" or "point-estimate"
    cluster_sentiment: np.ndarray | None = None  # (C, S), diagnostic
    cluster_aspect: np.ndarray | None = None  # (C, S, T), diagnostic


def _counts(state: ModelState, point_estimate: bool):
    if state.n_samples > 0 and not point_estimate:
        n = float(state.n_samples)
        return ("averaged", state.acc_ds / n, state.acc_dst / n, state.acc_stw / n, state.acc_st / n,
                state.acc_cs / n, state.acc_cst / n)
    return ("point-estimate", state.n_ds, state.n_dst, state.n_stw, state.n_st, state.n_cs, state.n_cst)


def posterior(state: ModelState, hp: Hyperparams, point_estimate: bool | None = None,
              cluster_posterior: bool = False) -> PosteriorView:
    """Averaged post-burn-in estimates when available, else the current sample."""
    if point_estimate is None:
        point_estimate = hp.point_estimate
    source, n_ds, n_dst, n_stw, n_st, n_cs, n_cst = _counts(state, point_estimate)
    return PosteriorView(
        doc_sentiment=sentiment_probs(n_ds, hp.gamma),
        doc_aspect=aspect_probs(n_dst, hp.alpha),
        word_given_sent_topic=word_probs(n_stw, n_st, hp.beta.beta, hp.beta.beta_row_sum),
        source=source,
        cluster_sentiment=sentiment_probs(n_cs, hp.gamma) if cluster_posterior else None,
        cluster_aspect=aspect_probs(n_cst, hp.alpha) if cluster_posterior else None,
    )


def _check_doc(state: ModelState, d: int) -> None:
    if not 0 <= d < state.num_documents:
        raise BadInputError(f"unknown document index {d}")


def doc_sentiment(state: ModelState, hp: Hyperparams, d: int, point_estimate: bool | None = None) -> np.ndarray:
    _check_doc(state, d)
    pe = hp.point_estimate if point_estimate is None else point_estimate
    _, n_ds, *_ = _counts(state, pe)
    return sentiment_probs(n_ds[d], hp.gamma)


def doc_aspect_given_sentiment(state: ModelState, hp: Hyperparams, d: int, s: int,
                               point_estimate: bool | None = None) -> np.ndarray:
    _check_doc(state, d)
    pe = hp.point_estimate if point_estimate is None else point_estimate
    _, _, n_dst, *_ = _counts(state, pe)
    return aspect_probs(n_dst[d, s], hp.alpha)


def word_prob(state: ModelState, hp: Hyperparams, s: int, z: int, point_estimate: bool | None = None) -> np.ndarray:
    pe = hp.point_estimate if point_estimate is None else point_estimate
    _, _, _, n_stw, n_st, *_ = _counts(state, pe)
    return (np.asarray(n_stw[s, z], dtype=np.float64) + hp.beta.beta[s]) / (float(n_st[s, z]) + hp.beta.beta_row_sum[s])


@dataclass(frozen=True)
class Classification:
    label: str | None  # None when unclassifiable
    p_pos: float | None
    p_neg: float | None
    tie: bool = False

    @property
    def classifiable(self) -> bool:
        return self.label is not None

    def to_record(self, doc_id: str) -> dict:
        return {"id": doc_id, "p_pos": self.p_pos, "p_neg": self.p_neg,
                "label": self.label if self.label is not None else "unclassifiable", "tie": self.tie}


UNCLASSIFIABLE = Classification(None, None, None)


def classify_probs(p: np.ndarray) -> Classification:
    """Positive iff P(pos) > P(neg); an exact tie goes positive with ``tie`` set."""
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (2,):
        raise ConfigError("sentiment classification needs exactly two sentiments")
    tie = bool(p[0] == p[1])
    label = POSITIVE if p[0] >= p[1] else NEGATIVE
    return Classification(label, float(p[0]), float(p[1]), tie)


def classify_document(source, hp: Hyperparams | None = None, d: int | None = None) -> Classification:
    """Classify a trained document (``source`` a ModelState with index ``d``), a
    FoldInResult, or an explicit probability pair."""
    if isinstance(source, ModelState):
        return classify_probs(doc_sentiment(source, hp, d))
    if isinstance(source, FoldInResult):
        if not source.classifiable:
            return UNCLASSIFIABLE
        return classify_probs(sentiment_probs(source.n_ds, hp.gamma))
    return classify_probs(source)


@dataclass(frozen=True)
class TopTerms:
    k: int
    terms: dict[tuple[int, int], list[tuple[str, float]]]

    def rows(self):
        for (s, z), ranked in sorted(self.terms.items()):
            for rank, (word, p) in enumerate(ranked, 1):
                yield s, z, rank, word, p


def rank_words(prob: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries; ties go to the lower index."""
    return np.argsort(-prob, kind="stable")[:k]


def top_terms(view: PosteriorView, vocabulary: Vocabulary, k: int) -> TopTerms:
    if k < 1:
        raise BadInputError("k must be >= 1")
    phi = view.word_given_sent_topic
    S, T, _ = phi.shape
    terms = {}
    for s in range(S):
        for z in range(T):
            idx = rank_words(phi[s, z], k)
            terms[(s, z)] = [(vocabulary.word(int(i)), float(phi[s, z, i])) for i in idx]
    return TopTerms(k, terms)
