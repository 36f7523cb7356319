"""Short-review ingestion: tokenizing, negation scope, vocabulary and word pairs."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from microasm.errors import BadInputError, EmptyCorpusError, VersionMismatchError

logger = logging.getLogger(__name__)

CORPUS_FORMAT_VERSION = 1
NEGATION_PREFIX = "not_"
DEFAULT_NEGATORS = frozenset(
    {"not", "no", "never", "cannot", "nt", "n't", "dont", "didnt", "isnt", "wasnt"}
)
POSITIVE = "pos"
NEGATIVE = "neg"

_TOKEN_RE = re.compile(r"[\w']+", re.UNICODE)


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    label: str | None = None
    rating: float | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise BadInputError(f"document {self.id!r} has empty text")
        if self.label not in (None, POSITIVE, NEGATIVE):
            raise BadInputError(f"document {self.id!r}: label must be 'pos' or 'neg', got {self.label!r}")


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    gold: str | None = None


class Vocabulary:
    """Bijective word <-> index map; indices follow first occurrence."""

    def __init__(self, words: Iterable[str] = ()):
        self._words: list[str] = []
        self._index: dict[str, int] = {}
        for w in words:
            if w in self._index:
                raise BadInputError(f"duplicate vocabulary entry {w!r}")
            self.add(w)

    def add(self, word: str) -> int:
        idx = self._index.get(word)
        if idx is None:
            idx = len(self._words)
            self._index[word] = idx
            self._words.append(word)
        return idx

    def index(self, word: str) -> int:
        return self._index[word]

    def get(self, word: str, default=None):
        return self._index.get(word, default)

    def word(self, idx: int) -> str:
        return self._words[idx]

    @property
    def words(self) -> list[str]:
        return list(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __len__(self) -> int:
        return len(self._words)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self._words == other._words

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"


@dataclass(frozen=True)
class PrepOptions:
    lowercase: bool = True
    stopwords: frozenset[str] = frozenset()
    negators: frozenset[str] = DEFAULT_NEGATORS
    negation_window: int = 5
    pair_window: int = 5
    rating_threshold: float = 3.0
    pretokenized: bool = False

    def __post_init__(self):
        if self.negation_window < 1 or self.pair_window < 1:
            raise BadInputError("negation and pair windows must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["stopwords"] = sorted(self.stopwords)
        d["negators"] = sorted(self.negators)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PrepOptions":
        d = dict(d)
        d["stopwords"] = frozenset(d.get("stopwords", ()))
        d["negators"] = frozenset(d.get("negators", DEFAULT_NEGATORS))
        return cls(**d)


@dataclass
class Corpus:
    documents: list[Document]
    vocabulary: Vocabulary
    options: PrepOptions = field(default_factory=PrepOptions)
    dropped: list[Document] = field(default_factory=list)

    @property
    def num_documents(self) -> int:
        return len(self.documents)

    @property
    def vocab_size(self) -> int:
        return len(self.vocabulary)

    @property
    def num_pairs(self) -> int:
        return sum(len(d.pairs) for d in self.documents)

    def stats(self) -> dict:
        return {
            "documents": self.num_documents,
            "dropped": len(self.dropped),
            "vocab_size": self.vocab_size,
            "pairs": self.num_pairs,
        }

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flatten pairs into (w1, w2, doc_ptr); pairs of doc d live in doc_ptr[d]:doc_ptr[d+1]."""
        lengths = np.fromiter((len(d.pairs) for d in self.documents), dtype=np.int64,
                              count=len(self.documents))
        doc_ptr = np.zeros(len(self.documents) + 1, dtype=np.int64)
        np.cumsum(lengths, out=doc_ptr[1:])
        flat = np.fromiter(
            (w for d in self.documents for p in d.pairs for w in p),
            dtype=np.int64,
            count=2 * int(doc_ptr[-1]),
        ).reshape(-1, 2)
        return np.ascontiguousarray(flat[:, 0]), np.ascontiguousarray(flat[:, 1]), doc_ptr

    def decode(self, doc: Document) -> list[str]:
        return [self.vocabulary.word(i) for i in doc.tokens]


def tokenize(text: str, lowercase: bool = True, stopwords: Iterable[str] | None = None) -> list[str]:
    """Split on whitespace and punctuation. Apostrophes are dropped so "didn't" -> "didnt"."""
    if lowercase:
        text = text.lower()
    tokens = [t.replace("'", "") for t in _TOKEN_RE.findall(text)]
    stop = set(stopwords or ())
    return [t for t in tokens if t and t not in stop]


def negate_word(word: str) -> str:
    if word.startswith(NEGATION_PREFIX):
        return word[len(NEGATION_PREFIX):]
    return NEGATION_PREFIX + word


def apply_negation(tokens: Sequence[str], negators: Iterable[str] = DEFAULT_NEGATORS,
                   window: int = 5) -> list[str]:
    """Toggle the ``not_`` prefix on the ``window`` tokens following each negator.

    Scopes overlap, so a token inside an even number of scopes is left alone
    (double negation cancels). Negators are removed from the output.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    negators = frozenset(negators)
    out = []
    last_negators: list[int] = []  # positions of recent negators, oldest first
    for i, tok in enumerate(tokens):
        while last_negators and i - last_negators[0] > window:
            last_negators.pop(0)
        if tok in negators:
            last_negators.append(i)
            continue
        out.append(negate_word(tok) if len(last_negators) % 2 else tok)
    return out


def extract_pairs(tokens: Sequence, window: int = 5) -> list[tuple]:
    """All (tokens[i], tokens[j]) with 0 < j - i <= window, in positional order."""
    if window < 1:
        raise ValueError("window must be >= 1")
    n = len(tokens)
    return [(tokens[i], tokens[j]) for i in range(n) for j in range(i + 1, min(n, i + window + 1))]


def gold_label(raw: RawDocument, threshold: float) -> str | None:
    if raw.label is not None:
        return raw.label
    if raw.rating is None:
        return None
    return NEGATIVE if raw.rating < threshold else POSITIVE


def preprocess(raw: RawDocument, options: PrepOptions) -> list[str]:
    if options.pretokenized:
        tokens = raw.text.split()
        if options.lowercase:
            tokens = [t.lower() for t in tokens]
        if options.stopwords:
            tokens = [t for t in tokens if t not in options.stopwords]
    else:
        tokens = tokenize(raw.text, options.lowercase, options.stopwords)
    return apply_negation(tokens, options.negators, options.negation_window)


def build_corpus(raw_documents: Sequence[RawDocument], options: PrepOptions | None = None) -> Corpus:
    options = options or PrepOptions()
    if not raw_documents:
        raise EmptyCorpusError("no input documents")
    seen = set()
    for raw in raw_documents:
        if raw.id in seen:
            raise BadInputError(f"duplicate document id {raw.id!r}")
        seen.add(raw.id)

    vocab = Vocabulary()
    kept, dropped = [], []
    for raw in raw_documents:
        ids = tuple(vocab.add(w) for w in preprocess(raw, options))
        doc = Document(
            id=raw.id,
            tokens=ids,
            pairs=tuple(extract_pairs(ids, options.pair_window)),
            gold=gold_label(raw, options.rating_threshold),
        )
        (kept if doc.pairs else dropped).append(doc)
    if not kept:
        raise EmptyCorpusError("no document yields a word pair after preprocessing")
    for doc in dropped:
        logger.info("document %s has no word pairs; excluded from training", doc.id)
    return Corpus(kept, vocab, options, dropped)


def read_jsonl(path: str | Path, strict: bool = False) -> list[RawDocument]:
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict) or "text" not in obj:
                    raise BadInputError("expected an object with a 'text' field")
                docs.append(RawDocument(
                    id=str(obj.get("id", lineno)),
                    text=str(obj["text"]),
                    label=obj.get("label"),
                    rating=None if obj.get("rating") is None else float(obj["rating"]),
                ))
            except (ValueError, TypeError) as exc:
                msg = f"{path}:{lineno}: malformed line ({exc})"
                if strict:
                    raise BadInputError(msg) from exc
                logger.warning("skipping %s", msg)
    return docs


def read_plain(path: str | Path, strict: bool = False) -> list[RawDocument]:
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                if strict:
                    raise BadInputError(f"{path}:{lineno}: empty document")
                continue
            docs.append(RawDocument(id=str(lineno), text=line.strip()))
    return docs


def corpus_to_dict(corpus: Corpus) -> dict:
    def doc_dict(d: Document) -> dict:
        return {"id": d.id, "tokens": list(d.tokens), "pairs": [list(p) for p in d.pairs], "gold": d.gold}

    return {
        "version": CORPUS_FORMAT_VERSION,
        "options": corpus.options.to_dict(),
        "vocabulary": corpus.vocabulary.words,
        "documents": [doc_dict(d) for d in corpus.documents],
        "dropped": [doc_dict(d) for d in corpus.dropped],
    }


def corpus_from_dict(data: dict) -> Corpus:
    version = data.get("version")
    if version != CORPUS_FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported corpus format version {version!r}")
    vocab = Vocabulary(data["vocabulary"])
    V = len(vocab)

    def doc(d: dict) -> Document:
        tokens = tuple(int(t) for t in d["tokens"])
        pairs = tuple((int(a), int(b)) for a, b in d["pairs"])
        if any(not 0 <= t < V for t in tokens) or any(not (0 <= a < V and 0 <= b < V) for a, b in pairs):
            raise BadInputError(f"document {d['id']!r} references a word outside the vocabulary")
        return Document(str(d["id"]), tokens, pairs, d.get("gold"))

    return Corpus(
        documents=[doc(d) for d in data["documents"]],
        vocabulary=vocab,
        options=PrepOptions.from_dict(data.get("options", {})),
        dropped=[doc(d) for d in data.get("dropped", [])],
    )


def dumps(obj) -> str:
    """Canonical compact JSON used for every file this package writes."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps(corpus_to_dict(corpus)) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> Corpus:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read corpus file {path}: {exc}") from exc
    return corpus_from_dict(data)
