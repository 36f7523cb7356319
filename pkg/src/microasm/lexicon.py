"""Polarity seed lists and the asymmetric word prior they induce."""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from microasm.corpus import Vocabulary, negate_word
from microasm.errors import BadInputError, LexiconConflictError

logger = logging.getLogger(__name__)

# Sentiment row order used throughout the package.
POS, NEG = 0, 1

PARADIGM_PLUS_POSITIVE = (
    "good", "nice", "excellent", "positive", "fortunate", "correct", "superior",
    "amazing", "attractive", "awesome", "best", "comfortable", "enjoy", "fantastic",
    "favorite", "fun", "glad", "great", "happy", "impressive", "love", "perfect",
    "recommend", "satisfied", "thank", "worth",
)
PARADIGM_PLUS_NEGATIVE = (
    "bad", "nasty", "poor", "negative", "unfortunate", "wrong", "inferior",
    "annoy", "complain", "disappointed", "hate", "junk", "mess", "dislike", "unworthy",
    "problem", "regret", "sorry", "terrible", "trouble", "unacceptable", "upset",
    "waste", "worst", "worthless",
)


@dataclass(frozen=True)
class SeedLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self):
        overlap = self.positive & self.negative
        if overlap:
            raise LexiconConflictError(min(overlap))

    def polarity(self, word: str) -> int | None:
        if word in self.positive:
            return POS
        if word in self.negative:
            return NEG
        return None

    def to_dict(self) -> dict:
        return {"positive": sorted(self.positive), "negative": sorted(self.negative)}


def expand_lexicon(positive: Iterable[str], negative: Iterable[str]) -> SeedLexicon:
    """Lowercase both lists and add each seed's negated form to the opposite list."""
    pos = {w.strip().lower() for w in positive if w.strip()}
    neg = {w.strip().lower() for w in negative if w.strip()}
    direct = pos & neg
    if direct:
        raise LexiconConflictError(min(direct))
    pos_full = pos | {negate_word(w) for w in neg}
    neg_full = neg | {negate_word(w) for w in pos}
    return SeedLexicon(frozenset(pos_full), frozenset(neg_full))


def _read_word_list(path: Path) -> list[str]:
    return [line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def load_lexicon(source=None) -> SeedLexicon:
    """Build an expanded SeedLexicon.

    ``source`` may be None (built-in English Paradigm+), a dict with
    ``positive``/``negative`` lists, a path to such a JSON file, or a
    ``(positive_path, negative_path)`` tuple of one-word-per-line files.
    """
    if source is None:
        positive, negative = PARADIGM_PLUS_POSITIVE, PARADIGM_PLUS_NEGATIVE
    elif isinstance(source, dict):
        positive, negative = source.get("positive", ()), source.get("negative", ())
    elif isinstance(source, (tuple, list)) and len(source) == 2:
        positive, negative = (_read_word_list(Path(p)) for p in source)
    elif isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BadInputError(f"cannot read lexicon {source}: {exc}") from exc
        positive, negative = data.get("positive", ()), data.get("negative", ())
    else:
        raise BadInputError(f"unsupported lexicon source {source!r}")
    lex = expand_lexicon(positive, negative)
    if not lex.positive and not lex.negative:
        warnings.warn("seed lexicon is empty; the word prior will be symmetric", UserWarning, stacklevel=2)
    return lex


@dataclass(frozen=True, eq=False)
class BetaPrior:
    beta: np.ndarray  # (S, V)
    beta_row_sum: np.ndarray  # (S,)
    base: float
    seed_match: float

    @property
    def num_sentiments(self) -> int:
        return self.beta.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.beta.shape[1]


def build_beta(lexicon: SeedLexicon, vocabulary: Vocabulary | Iterable[str], base: float = 0.01,
               seed_match: float = 0.1, num_sentiments: int = 2) -> BetaPrior:
    """Per (sentiment, word) prior: base for non-seeds, seed_match for a seed of that
    sentiment, zero for a seed of any other sentiment.

    With more than two sentiments the extra rows treat every seed as a mismatch.
    """
    if base <= 0 or seed_match <= 0:
        raise BadInputError("beta base and seed masses must be > 0")
    if num_sentiments < 2:
        raise BadInputError("the seeded prior needs at least two sentiments")
    words = vocabulary.words if isinstance(vocabulary, Vocabulary) else list(vocabulary)
    beta = np.full((num_sentiments, len(words)), float(base))
    matched = 0
    for w_idx, word in enumerate(words):
        pol = lexicon.polarity(word)
        if pol is None:
            continue
        matched += 1
        beta[:, w_idx] = 0.0
        beta[pol, w_idx] = seed_match
    logger.debug("%d of %d seed words occur in the vocabulary", matched,
                 len(lexicon.positive) + len(lexicon.negative))
    beta.setflags(write=False)
    row_sum = beta.sum(axis=1)
    row_sum.setflags(write=False)
    return BetaPrior(beta, row_sum, float(base), float(seed_match))
