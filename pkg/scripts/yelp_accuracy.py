#!/usr/bin/env python3
"""Sentiment accuracy on a user-supplied Yelp-format review file.

The input is JSON Lines with at least ``text`` and ``stars`` (Yelp dataset
field names) or ``rating``/``label``. Reviews under the star threshold are
negative. The script preprocesses, trains with the default hyperparameters
(overridable), classifies the training reviews and prints the accuracy so it
can be compared by hand with the published Yelp figure (80.8 average).

    python scripts/yelp_accuracy.py reviews.jsonl --limit 20000 --iterations 1500
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from microasm.corpus import PrepOptions, RawDocument, build_corpus
from microasm.evaluation import accuracy
from microasm.lexicon import build_beta, load_lexicon
from microasm.posterior import classify_document
from microasm.sampler import Hyperparams, train

PUBLISHED_YELP_ACCURACY = 80.8


def read_reviews(path: str, limit: int | None) -> list[RawDocument]:
    docs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if limit is not None and len(docs) >= limit:
                break
            if not line.strip():
                continue
            obj = json.loads(line)
            text = str(obj.get("text", "")).strip()
            if not text:
                continue
            rating = obj.get("stars", obj.get("rating"))
            docs.append(RawDocument(str(obj.get("review_id", obj.get("id", lineno))), text,
                                    label=obj.get("label"), rating=None if rating is None else float(rating)))
    return docs


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="Train on Yelp-format reviews and report classification accuracy.")
    p.add_argument("reviews", help="JSON Lines with text and stars (or rating / label)")
    p.add_argument("--limit", type=int, help="use only the first N reviews")
    p.add_argument("--rating-threshold", type=float, default=3.0)
    p.add_argument("--stopwords", help="whitespace-separated stopword file")
    p.add_argument("--lexicon", help="JSON lexicon; default is the built-in English seed list")
    p.add_argument("--clusters", type=int, default=500)
    p.add_argument("--topics", type=int, default=15)
    p.add_argument("--iterations", type=int, default=1500)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    stop = frozenset()
    if args.stopwords:
        with open(args.stopwords, encoding="utf-8") as f:
            stop = frozenset(f.read().split())
    corpus = build_corpus(read_reviews(args.reviews, args.limit),
                          PrepOptions(stopwords=stop, rating_threshold=args.rating_threshold))
    lexicon = load_lexicon(args.lexicon)
    hp = Hyperparams(beta=build_beta(lexicon, corpus.vocabulary), num_clusters=args.clusters,
                     num_topics=args.topics, iterations=args.iterations, burn_in=args.burn_in, seed=args.seed)
    t0 = time.perf_counter()
    state, report = train(corpus, hp, track_log_joint=False)
    predictions = {doc.id: classify_document(state, hp, d).label for d, doc in enumerate(corpus.documents)}
    gold = {doc.id: doc.gold for doc in corpus.documents}
    result = accuracy(predictions, gold)
    print(json.dumps({
        "documents": corpus.num_documents,
        "dropped": len(corpus.dropped),
        "vocab_size": corpus.vocab_size,
        "accuracy_percent": round(100 * result.accuracy, 2),
        "published_yelp_average_percent": PUBLISHED_YELP_ACCURACY,
        "unconstrained_pairs": report.unconstrained_pairs,
        "train_seconds": round(time.perf_counter() - t0, 1),
        "hyperparams": hp.to_dict(),
    }, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
