"""Classification accuracy, annotation metrics and partition/topic recovery scores."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from microasm.errors import BadInputError

RESERVED_LABELS = frozenset({"general", "other", "none", "undecidable", "positive", "negative"})
NONSPECIFIC_LABELS = frozenset({"general", "other", "none"})


@dataclass(frozen=True)
class AccuracyResult:
    accuracy: float
    correct: int
    evaluated: int
    unclassifiable: int


def accuracy(predictions: Mapping[str, str | None], gold: Mapping[str, str | None]) -> AccuracyResult:
    """Fraction of gold-labelled documents predicted correctly.

    A prediction of None marks an unclassifiable document; those are counted
    separately and left out of the denominator.
    """
    correct = evaluated = unclassifiable = 0
    for doc_id, truth in gold.items():
        if truth is None or doc_id not in predictions:
            continue
        pred = predictions[doc_id]
        if pred is None:
            unclassifiable += 1
            continue
        evaluated += 1
        correct += pred == truth
    if evaluated == 0:
        raise BadInputError("no document could be evaluated")
    return AccuracyResult(correct / evaluated, correct, evaluated, unclassifiable)


def shannon_diversity(labels: Sequence[Hashable], base: float | None = None) -> float:
    """-sum_a p_a log p_a over label frequencies (natural log unless ``base`` is given)."""
    if len(labels) == 0:
        raise BadInputError("diversity of an empty label list is undefined")
    n = len(labels)
    h = -sum((c / n) * math.log(c / n) for c in Counter(labels).values())
    h = h + 0.0  # normalize -0.0
    return h / math.log(base) if base is not None else h


def specificity(labels: Sequence[str], nonspecific: Iterable[str] = NONSPECIFIC_LABELS) -> float:
    if len(labels) == 0:
        raise BadInputError("specificity of an empty label list is undefined")
    nonspecific = frozenset(nonspecific)
    return (len(labels) - sum(lab in nonspecific for lab in labels)) / len(labels)


@dataclass(frozen=True)
class AnnotationSheet:
    """Rows of ((sentiment, topic), annotator, label)."""

    rows: tuple[tuple[tuple[int, int], str, str], ...]

    def __post_init__(self):
        seen = set()
        for dist, annotator, _ in self.rows:
            if (dist, annotator) in seen:
                raise BadInputError(f"duplicate annotation for distribution {dist} by {annotator!r}")
            seen.add((dist, annotator))

    @classmethod
    def from_csv(cls, path: str | Path) -> "AnnotationSheet":
        rows = []
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            missing = {"sentiment", "topic", "annotator", "label"} - set(reader.fieldnames or ())
            if missing:
                raise BadInputError(f"annotation sheet lacks columns {sorted(missing)}")
            for lineno, rec in enumerate(reader, 2):
                try:
                    dist = (int(rec["sentiment"]), int(rec["topic"]))
                except ValueError as exc:
                    raise BadInputError(f"{path}:{lineno}: {exc}") from exc
                rows.append((dist, rec["annotator"].strip(), rec["label"].strip().lower()))
        return cls(tuple(rows))

    @property
    def annotators(self) -> list[str]:
        return sorted({a for _, a, _ in self.rows})

    def pooled_labels(self) -> list[str]:
        return [lab for _, _, lab in self.rows]

    def aligned(self) -> tuple[list[str], list[str]]:
        """Labels of the two annotators on the distributions both annotated."""
        annotators = self.annotators
        if len(annotators) != 2:
            raise BadInputError(f"kappa needs exactly two annotators, found {len(annotators)}")
        by = {a: {} for a in annotators}
        for dist, a, lab in self.rows:
            by[a][dist] = lab
        first, second = (by[a] for a in annotators)
        if set(first) != set(second):
            raise BadInputError("annotators labelled different distributions")
        items = sorted(first)
        return [first[i] for i in items], [second[i] for i in items]


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed: float
    expected: float
    n_items: int
    degenerate: bool = False


def cohen_kappa(sheet: AnnotationSheet | tuple[Sequence[str], Sequence[str]],
                published_formula: bool = False) -> KappaResult:
    """Two-rater, multi-category Cohen's kappa with chance agreement from each rater's marginals.

    ``published_formula`` multiplies in the extra (1 - P)/(N (1 - Pe)) factor of the
    published expression, with N the pooled annotation count.
    """
    a, b = sheet.aligned() if isinstance(sheet, AnnotationSheet) else sheet
    if len(a) != len(b) or not a:
        raise BadInputError("kappa needs two equally long, non-empty label lists")
    n = len(a)
    observed = sum(x == y for x, y in zip(a, b)) / n
    ca, cb = Counter(a), Counter(b)
    expected = sum(ca[k] * cb[k] for k in ca) / (n * n)
    if expected == 1.0:
        return KappaResult(1.0, observed, expected, n, degenerate=True)
    kappa = (observed - expected) / (1.0 - expected)
    if published_formula:
        kappa *= (1.0 - observed) / (2 * n * (1.0 - expected))
    return KappaResult(kappa, observed, expected, n)


def nmi(labels_true: Sequence[int], labels_pred: Sequence[int]) -> float:
    """Normalized mutual information, arithmetic-mean normalization."""
    t = np.unique(np.asarray(labels_true), return_inverse=True)[1]
    p = np.unique(np.asarray(labels_pred), return_inverse=True)[1]
    if t.size == 0:
        raise BadInputError("empty partition")
    table = np.zeros((t.max() + 1, p.max() + 1))
    np.add.at(table, (t, p), 1)
    pxy = table / t.size
    px, py = pxy.sum(axis=1), pxy.sum(axis=0)
    nz = pxy > 0
    mi = float(np.sum(pxy[nz] * np.log(pxy[nz] / np.outer(px, py)[nz])))
    hx = -float(np.sum(px * np.log(px)))
    hy = -float(np.sum(py * np.log(py)))
    if hx == 0.0 and hy == 0.0:
        return 1.0
    denom = (hx + hy) / 2
    return max(0.0, min(1.0, mi / denom)) if denom > 0 else 0.0


def matched_purity(predicted: Sequence[Iterable[Hashable]], planted: Sequence[set]) -> tuple[float, list[int]]:
    """Mean fraction of each predicted word list inside its planted set, under the
    one-to-one matching that maximizes total overlap (Hungarian)."""
    predicted = [list(p) for p in predicted]
    overlap = np.array([[sum(w in truth for w in pred) for truth in planted] for pred in predicted], dtype=float)
    rows, cols = linear_sum_assignment(-overlap)
    sizes = np.array([len(p) for p in predicted], dtype=float)
    purity = float(np.mean(overlap[rows, cols] / sizes[rows]))
    matching = [-1] * len(predicted)
    for r, c in zip(rows, cols):
        matching[r] = int(c)
    return purity, matching
