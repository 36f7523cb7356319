#!/usr/bin/env python3
"""Sweep timing on a random Zipfian corpus (default: 25k docs, 12 tokens, C=100, T=15)."""

from __future__ import annotations

import argparse
import json
import time

from microasm.evaluation.synthetic import random_token_corpus
from microasm.lexicon import SeedLexicon, build_beta
from microasm.sampler import Hyperparams, train


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--docs", type=int, default=25_000)
    p.add_argument("--tokens", type=float, default=12.0)
    p.add_argument("--vocab", type=int, default=5000)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--clusters", type=int, default=100)
    p.add_argument("--topics", type=int, default=15)
    p.add_argument("--sweeps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    t0 = time.perf_counter()
    corpus = random_token_corpus(args.docs, args.tokens, args.vocab, args.window, seed=args.seed)
    # seeds drawn from mid-frequency ranks so few pairs hold both polarities
    lex = SeedLexicon(frozenset(f"t{i}" for i in range(100, 120)), frozenset(f"t{i}" for i in range(120, 140)))
    hp = Hyperparams(beta=build_beta(lex, corpus.vocabulary), num_clusters=args.clusters, num_topics=args.topics,
                     iterations=args.sweeps, burn_in=args.sweeps // 2, seed=args.seed)
    built = time.perf_counter() - t0
    t1 = time.perf_counter()
    _, report = train(corpus, hp, track_log_joint=False)
    total = time.perf_counter() - t1
    per = [s.seconds for s in report.sweeps]
    print(json.dumps({"documents": corpus.num_documents, "pairs": corpus.num_pairs, "build_seconds": round(built, 2),
                      "train_seconds": round(total, 2), "mean_sweep_seconds": round(sum(per) / len(per), 3),
                      "first_sweep_seconds": round(per[0], 3)}, indent=2))


if __name__ == "__main__":
    main()
