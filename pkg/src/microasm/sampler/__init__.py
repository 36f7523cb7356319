"""Collapsed Gibbs sampler: state, the two conditional kernels, training and fold-in."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from microasm.corpus import Corpus, extract_pairs
from microasm.errors import ConfigError, MicroASMError
from microasm.lexicon import BetaPrior
from microasm.sampler import _kernels

logger = logging.getLogger(__name__)


class InvariantError(MicroASMError):
    code = "invariant_violation"


@dataclass
class Hyperparams:
    alpha: float = 0.1
    gamma: float = 1.0
    delta: float = 0.1
    beta: BetaPrior | None = None
    num_clusters: int = 500
    num_topics: int = 15
    num_sentiments: int = 2
    iterations: int = 1500
    burn_in: int = 1000
    seed: int = 0
    strict_cluster_formula: bool = False
    point_estimate: bool = False

    def validate(self, vocab_size: int | None = None) -> None:
        for name in ("alpha", "gamma", "delta"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        if self.num_clusters < 1 or self.num_topics < 1:
            raise ConfigError("cluster and topic counts must be >= 1")
        if self.num_sentiments < 1:
            raise ConfigError("sentiment count must be >= 1")
        if self.iterations < 0 or self.burn_in < 0:
            raise ConfigError("iterations and burn-in must be >= 0")
        if self.iterations > 0 and not self.point_estimate and self.burn_in >= self.iterations:
            raise ConfigError(f"burn-in ({self.burn_in}) must be smaller than iterations ({self.iterations})")
        if self.beta is None:
            raise ConfigError("a word prior (beta) is required")
        if np.any(self.beta.beta < 0):
            raise ConfigError("beta entries must be non-negative")
        if self.beta.num_sentiments != self.num_sentiments:
            raise ConfigError(f"beta has {self.beta.num_sentiments} sentiment rows, expected {self.num_sentiments}")
        if vocab_size is not None and self.beta.vocab_size != vocab_size:
            raise ConfigError(f"beta covers {self.beta.vocab_size} words but the vocabulary has {vocab_size}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.num_clusters, self.num_sentiments, self.num_topics

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("beta")
        if self.beta is not None:
            d["beta_base"] = self.beta.base
            d["beta_seed"] = self.beta.seed_match
        return d


COUNT_FIELDS = ("n_cluster", "n_cs", "n_cst", "n_stw", "n_st", "n_ds", "n_dst")
ACC_FIELDS = ("acc_ds", "acc_dst", "acc_stw", "acc_st", "acc_cs", "acc_cst")


@dataclass(eq=False)
class ModelState:
    """Assignments, count tensors and post-burn-in accumulators of one chain.

    Sentiment 0 is positive and 1 is negative wherever polarity matters.
    """

    w1: np.ndarray
    w2: np.ndarray
    doc_ptr: np.ndarray
    cluster_of_doc: np.ndarray
    assign_s: np.ndarray
    assign_z: np.ndarray
    unconstrained: np.ndarray
    n_cluster: np.ndarray
    n_cs: np.ndarray
    n_cst: np.ndarray
    n_stw: np.ndarray
    n_st: np.ndarray
    n_ds: np.ndarray
    n_dst: np.ndarray
    acc_ds: np.ndarray
    acc_dst: np.ndarray
    acc_stw: np.ndarray
    acc_st: np.ndarray
    acc_cs: np.ndarray
    acc_cst: np.ndarray
    n_samples: int = 0
    sweeps_done: int = 0
    fallbacks: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))

    @property
    def num_documents(self) -> int:
        return self.doc_ptr.shape[0] - 1

    @property
    def vocab_size(self) -> int:
        return self.n_stw.shape[2]

    @property
    def n_doc_pairs(self) -> np.ndarray:
        return np.diff(self.doc_ptr)

    def doc_slice(self, d: int) -> slice:
        return slice(int(self.doc_ptr[d]), int(self.doc_ptr[d + 1]))

    def counts(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in COUNT_FIELDS}

    def copy(self) -> "ModelState":
        kw = {}
        for name, value in self.__dict__.items():
            kw[name] = value.copy() if isinstance(value, np.ndarray) else value
        return ModelState(**kw)


@dataclass
class SweepStats:
    sweep: int
    log_joint: float
    nonempty_clusters: int
    seconds: float
    cluster_fallbacks: int
    pair_fallbacks: int


@dataclass
class TrainReport:
    sweeps: list[SweepStats] = field(default_factory=list)
    unconstrained_pairs: int = 0

    @property
    def cluster_fallbacks(self) -> int:
        return self.sweeps[-1].cluster_fallbacks if self.sweeps else 0

    @property
    def pair_fallbacks(self) -> int:
        return self.sweeps[-1].pair_fallbacks if self.sweeps else 0

    @property
    def final_log_joint(self) -> float | None:
        return self.sweeps[-1].log_joint if self.sweeps else None


def _empty_state(w1, w2, doc_ptr, hp: Hyperparams, vocab_size: int) -> ModelState:
    C, S, T = hp.shape
    D = doc_ptr.shape[0] - 1
    P = w1.shape[0]
    i64 = np.int64
    return ModelState(
        w1=w1, w2=w2, doc_ptr=doc_ptr,
        cluster_of_doc=np.zeros(D, i64), assign_s=np.zeros(P, i64), assign_z=np.zeros(P, i64),
        unconstrained=np.zeros(P, np.bool_),
        n_cluster=np.zeros(C, i64), n_cs=np.zeros((C, S), i64), n_cst=np.zeros((C, S, T), i64),
        n_stw=np.zeros((S, T, vocab_size), i64), n_st=np.zeros((S, T), i64),
        n_ds=np.zeros((D, S), i64), n_dst=np.zeros((D, S, T), i64),
        acc_ds=np.zeros((D, S), i64), acc_dst=np.zeros((D, S, T), i64),
        acc_stw=np.zeros((S, T, vocab_size), i64), acc_st=np.zeros((S, T), i64),
        acc_cs=np.zeros((C, S), i64), acc_cst=np.zeros((C, S, T), i64),
    )


def _fill_counts(state: ModelState) -> None:
    for name in COUNT_FIELDS:
        getattr(state, name).fill(0)
    _kernels.build_counts(state.w1, state.w2, state.doc_ptr, state.cluster_of_doc, state.assign_s,
                          state.assign_z, *state.counts().values())


def _seed_streams(seed: int, chain: int = 0) -> tuple[np.random.Generator, np.random.Generator]:
    init_ss, sweep_ss = np.random.SeedSequence(seed).spawn(chain + 1)[chain].spawn(2)
    return np.random.default_rng(init_ss), np.random.default_rng(sweep_ss)


def initialize(corpus: Corpus, hp: Hyperparams, rng: np.random.Generator | None = None) -> ModelState:
    """Random clusters and seed-respecting random (sentiment, topic) assignments."""
    hp.validate(corpus.vocab_size)
    if corpus.num_documents == 0:
        raise ConfigError("cannot initialize on an empty corpus")
    if rng is None:
        rng, _ = _seed_streams(hp.seed)
    w1, w2, doc_ptr = corpus.pair_arrays()
    state = _empty_state(w1, w2, doc_ptr, hp, corpus.vocab_size)
    C, S, T = hp.shape
    _kernels.initialize_state(w1, w2, doc_ptr, C, S, T, hp.beta.beta, rng,
                              state.cluster_of_doc, state.assign_s, state.assign_z, state.unconstrained)
    _fill_counts(state)
    return state


def state_from_assignments(corpus: Corpus | tuple, hp: Hyperparams, cluster_of_doc, assign_s, assign_z) -> ModelState:
    """Build a state (counts included) from explicit assignments.

    ``corpus`` may be a Corpus or a (w1, w2, doc_ptr, vocab_size) tuple.
    """
    if isinstance(corpus, Corpus):
        w1, w2, doc_ptr = corpus.pair_arrays()
        V = corpus.vocab_size
    else:
        w1, w2, doc_ptr, V = corpus
    state = _empty_state(np.asarray(w1, np.int64), np.asarray(w2, np.int64), np.asarray(doc_ptr, np.int64), hp, V)
    C, S, T = hp.shape
    state.cluster_of_doc[:] = cluster_of_doc
    state.assign_s[:] = assign_s
    state.assign_z[:] = assign_z
    if state.cluster_of_doc.size and not (0 <= state.cluster_of_doc.min() and state.cluster_of_doc.max() < C):
        raise ConfigError("cluster assignment out of range")
    if state.assign_s.size and not (0 <= state.assign_s.min() and state.assign_s.max() < S
                                    and 0 <= state.assign_z.min() and state.assign_z.max() < T):
        raise ConfigError("pair assignment out of range")
    beta = hp.beta.beta
    ok = (beta[:, state.w1] > 0) & (beta[:, state.w2] > 0)
    state.unconstrained[:] = ~ok.any(axis=0)
    _fill_counts(state)
    return state


def recompute_counts(state: ModelState) -> dict[str, np.ndarray]:
    """All count tensors rebuilt from assignments with vectorized numpy (independent of the kernels)."""
    C, S = state.n_cs.shape
    T = state.n_cst.shape[2]
    V = state.vocab_size
    D = state.num_documents
    doc_of_pair = np.repeat(np.arange(D), state.n_doc_pairs)
    c = state.cluster_of_doc[doc_of_pair]
    s, z = state.assign_s, state.assign_z
    i64 = np.int64
    n_cluster = np.bincount(state.cluster_of_doc, minlength=C).astype(i64)
    n_cs = np.bincount(c * S + s, minlength=C * S).reshape(C, S).astype(i64)
    n_cst = np.bincount((c * S + s) * T + z, minlength=C * S * T).reshape(C, S, T).astype(i64)
    n_ds = np.bincount(doc_of_pair * S + s, minlength=D * S).reshape(D, S).astype(i64)
    n_dst = np.bincount((doc_of_pair * S + s) * T + z, minlength=D * S * T).reshape(D, S, T).astype(i64)
    st = s * T + z
    n_stw = (np.bincount(st * V + state.w1, minlength=S * T * V)
             + np.bincount(st * V + state.w2, minlength=S * T * V)).reshape(S, T, V).astype(i64)
    n_st = 2 * np.bincount(st, minlength=S * T).reshape(S, T).astype(i64)
    return {"n_cluster": n_cluster, "n_cs": n_cs, "n_cst": n_cst, "n_stw": n_stw,
            "n_st": n_st, "n_ds": n_ds, "n_dst": n_dst}


def check_counts(state: ModelState) -> None:
    """Raise InvariantError unless every incremental tensor equals its recomputation."""
    fresh = recompute_counts(state)
    for name, expected in fresh.items():
        if not np.array_equal(getattr(state, name), expected):
            raise InvariantError(f"count tensor {name} diverged from the assignments")
    if state.n_cluster.sum() != state.num_documents:
        raise InvariantError("cluster sizes do not sum to the document count")
    if not np.array_equal(state.n_ds.sum(axis=1), state.n_doc_pairs):
        raise InvariantError("document sentiment counts do not sum to pair counts")
    if not np.array_equal(state.n_st, state.n_stw.sum(axis=2)):
        raise InvariantError("word totals disagree with per-word counts")


def log_joint(state: ModelState, hp: Hyperparams) -> float:
    """Collapsed joint log p(words, clusters, sentiments, topics) from the count tensors."""
    C, S, T = hp.shape

    def dm(counts, prior, prior_sum):
        # Dirichlet-multinomial log marginal over the last axis
        counts = np.asarray(counts, dtype=np.float64)
        n = counts.sum(axis=-1)
        out = np.sum(gammaln(prior_sum) - gammaln(prior_sum + n))
        nz = counts > 0
        prior_b = np.broadcast_to(prior, counts.shape)
        if np.any(prior_b[nz] == 0):
            return -np.inf
        out += np.sum(gammaln(prior_b[nz] + counts[nz]) - gammaln(prior_b[nz]))
        return out

    total = dm(state.n_cluster, hp.delta, C * hp.delta)
    total += dm(state.n_cs, hp.gamma, S * hp.gamma)
    total += dm(state.n_cst, hp.alpha, T * hp.alpha)
    beta = hp.beta.beta[:, None, :]
    total += dm(state.n_stw, beta, hp.beta.beta_row_sum[:, None])
    return float(total)


def _remove_document(state: ModelState, d: int) -> None:
    c = state.cluster_of_doc[d]
    state.n_cluster[c] -= 1
    state.n_cs[c] -= state.n_ds[d]
    state.n_cst[c] -= state.n_dst[d]


def _add_document(state: ModelState, d: int, c: int) -> None:
    state.cluster_of_doc[d] = c
    state.n_cluster[c] += 1
    state.n_cs[c] += state.n_ds[d]
    state.n_cst[c] += state.n_dst[d]


def cluster_conditional(state: ModelState, hp: Hyperparams, d: int) -> np.ndarray:
    """Normalized conditional over clusters for document d (state left unchanged)."""
    c = int(state.cluster_of_doc[d])
    _remove_document(state, d)
    try:
        logw = np.empty(hp.num_clusters)
        _kernels.cluster_log_weights(state.n_cluster, state.n_cs, state.n_cst, state.n_ds[d], state.n_dst[d],
                                     hp.alpha, hp.gamma, hp.delta, hp.strict_cluster_formula, logw)
    finally:
        _add_document(state, d, c)
    if not np.isfinite(logw.max()):
        return np.full(hp.num_clusters, 1.0 / hp.num_clusters)
    p = np.exp(logw - logw.max())
    return p / p.sum()


def _pair_counts_delta(state: ModelState, d: int, i: int, sign: int) -> None:
    c = state.cluster_of_doc[d]
    s, z = state.assign_s[i], state.assign_z[i]
    state.n_cs[c, s] += sign
    state.n_cst[c, s, z] += sign
    state.n_ds[d, s] += sign
    state.n_dst[d, s, z] += sign
    state.n_stw[s, z, state.w1[i]] += sign
    state.n_stw[s, z, state.w2[i]] += sign
    state.n_st[s, z] += 2 * sign


def pair_conditional(state: ModelState, hp: Hyperparams, d: int, i: int) -> np.ndarray:
    """Normalized (S, T) conditional for pair i of document d (i is the within-document index)."""
    g = int(state.doc_ptr[d]) + i
    _pair_counts_delta(state, d, g, -1)
    try:
        w = np.empty((hp.num_sentiments, hp.num_topics))
        total = _kernels.pair_weights(int(state.cluster_of_doc[d]), int(state.w1[g]), int(state.w2[g]),
                                      state.n_cs, state.n_cst, state.n_stw, state.n_st,
                                      hp.beta.beta, hp.beta.beta_row_sum, hp.alpha, hp.gamma, w)
    finally:
        _pair_counts_delta(state, d, g, +1)
    if not total > 0:
        return np.full_like(w, 1.0 / w.size)
    return w / total


def sample_document_cluster(state: ModelState, hp: Hyperparams, d: int, rng: np.random.Generator) -> int:
    logw = np.empty(hp.num_clusters)
    probs = np.empty(hp.num_clusters)
    if _kernels.sample_cluster_step(d, state.cluster_of_doc, state.n_cluster, state.n_cs, state.n_cst,
                                    state.n_ds, state.n_dst, hp.alpha, hp.gamma, hp.delta,
                                    hp.strict_cluster_formula, rng, logw, probs):
        state.fallbacks[0] += 1
    return int(state.cluster_of_doc[d])


def sample_pair_assignment(state: ModelState, hp: Hyperparams, d: int, i: int,
                           rng: np.random.Generator) -> tuple[int, int]:
    g = int(state.doc_ptr[d]) + i
    weights = np.empty((hp.num_sentiments, hp.num_topics))
    if _kernels.sample_pair_step(d, g, int(state.cluster_of_doc[d]), state.w1, state.w2, state.assign_s,
                                 state.assign_z, state.n_cs, state.n_cst, state.n_stw, state.n_st,
                                 state.n_ds, state.n_dst, hp.beta.beta, hp.beta.beta_row_sum,
                                 hp.alpha, hp.gamma, rng, weights):
        state.fallbacks[1] += 1
    return int(state.assign_s[g]), int(state.assign_z[g])


def run_sweep(state: ModelState, hp: Hyperparams, rng: np.random.Generator) -> None:
    _kernels.sweep(state.w1, state.w2, state.doc_ptr, state.cluster_of_doc, state.assign_s, state.assign_z,
                   state.n_cluster, state.n_cs, state.n_cst, state.n_stw, state.n_st, state.n_ds, state.n_dst,
                   hp.beta.beta, hp.beta.beta_row_sum, hp.alpha, hp.gamma, hp.delta, hp.strict_cluster_formula,
                   rng, state.fallbacks)
    state.sweeps_done += 1


def _accumulate(state: ModelState) -> None:
    state.acc_ds += state.n_ds
    state.acc_dst += state.n_dst
    state.acc_stw += state.n_stw
    state.acc_st += state.n_st
    state.acc_cs += state.n_cs
    state.acc_cst += state.n_cst
    state.n_samples += 1


def train(corpus: Corpus, hp: Hyperparams, *, debug: bool = False, chain: int = 0,
          callback: Callable[[int, ModelState], None] | None = None,
          track_log_joint: bool = True) -> tuple[ModelState, TrainReport]:
    """Initialize and run ``hp.iterations`` sweeps.

    Sweeps after ``hp.burn_in`` are accumulated for posterior averaging.
    ``callback(sweep, state)`` runs after every sweep; ``debug`` re-derives all
    counts after every sweep and raises InvariantError on any mismatch.
    """
    hp.validate(corpus.vocab_size)
    init_rng, sweep_rng = _seed_streams(hp.seed, chain)
    state = initialize(corpus, hp, init_rng)
    report = TrainReport(unconstrained_pairs=int(state.unconstrained.sum()))
    if report.unconstrained_pairs:
        logger.warning("%d pairs contain seeds of both polarities", report.unconstrained_pairs)
    for sweep_idx in range(1, hp.iterations + 1):
        t0 = time.perf_counter()
        run_sweep(state, hp, sweep_rng)
        if sweep_idx > hp.burn_in:
            _accumulate(state)
        elapsed = time.perf_counter() - t0
        if debug:
            check_counts(state)
        report.sweeps.append(SweepStats(
            sweep=sweep_idx,
            log_joint=log_joint(state, hp) if track_log_joint or sweep_idx == hp.iterations else float("nan"),
            nonempty_clusters=int(np.count_nonzero(state.n_cluster)),
            seconds=elapsed,
            cluster_fallbacks=int(state.fallbacks[0]),
            pair_fallbacks=int(state.fallbacks[1]),
        ))
        if callback is not None:
            callback(sweep_idx, state)
        if sweep_idx % 100 == 0:
            logger.info("sweep %d: log joint %.2f, %d clusters in use", sweep_idx,
                        report.sweeps[-1].log_joint, report.sweeps[-1].nonempty_clusters)
    return state, report


def train_chains(corpus: Corpus, hp: Hyperparams, chains: int, **kwargs) -> tuple[ModelState, TrainReport, int]:
    """Run independent chains and keep the one with the highest final collapsed log joint."""
    if chains < 1:
        raise ConfigError("chains must be >= 1")
    best = None
    for k in range(chains):
        state, report = train(corpus, hp, chain=k, **kwargs)
        score = log_joint(state, hp)
        if best is None or score > best[0]:
            best = (score, state, report, k)
    return best[1], best[2], best[3]


@dataclass
class FoldInResult:
    n_ds: np.ndarray | None
    n_dst: np.ndarray | None
    num_pairs: int = 0
    fallbacks: int = 0

    @property
    def classifiable(self) -> bool:
        return self.n_ds is not None


def fold_in(state: ModelState, hp: Hyperparams, tokens: Sequence[int | None] = (), *, window: int = 5,
            pairs: Sequence[tuple[int, int]] | None = None, burn_in: int = 50, samples: int = 20,
            rng: np.random.Generator | None = None) -> FoldInResult:
    """Infer a held-out document's averaged sentiment/topic counts against frozen global counts.

    ``tokens`` are vocabulary ids; ``None`` marks out-of-vocabulary words, which are dropped
    before pairing. A lone in-vocabulary token is paired with itself. Explicit ``pairs``
    bypass pairing.
    """
    if samples < 1:
        raise ConfigError("fold-in needs at least one averaged sweep")
    V = state.vocab_size
    if pairs is None:
        ids = [t for t in tokens if t is not None and 0 <= t < V]
        if not ids:
            return FoldInResult(None, None)
        pairs = extract_pairs(ids, window) or [(ids[0], ids[0])]
    else:
        pairs = [(a, b) for a, b in pairs if 0 <= a < V and 0 <= b < V]
        if not pairs:
            return FoldInResult(None, None)
    w1 = np.array([p[0] for p in pairs], dtype=np.int64)
    w2 = np.array([p[1] for p in pairs], dtype=np.int64)
    uniq, inverse = np.unique(np.concatenate([w1, w2]), return_inverse=True)
    local_w1 = inverse[: len(pairs)].astype(np.int64)
    local_w2 = inverse[len(pairs):].astype(np.int64)
    if rng is None:
        rng = np.random.default_rng(hp.seed)
    n_ds, n_dst, fb = _kernels.fold_in_document(
        w1, w2, local_w1, local_w2, len(uniq), state.n_cluster, state.n_cs, state.n_cst,
        state.n_stw, state.n_st, hp.beta.beta, hp.beta.beta_row_sum,
        hp.alpha, hp.gamma, hp.delta, hp.strict_cluster_formula, burn_in, samples, rng)
    return FoldInResult(n_ds, n_dst, len(pairs), int(fb))
