"""``microasm`` command line: prep, train, topics, classify, eval, metrics, synth, clusters."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from microasm.config import Config
from microasm.corpus import (
    DEFAULT_NEGATORS,
    PrepOptions,
    build_corpus,
    dumps,
    gold_label,
    load_corpus,
    preprocess,
    read_jsonl,
    read_plain,
    save_corpus,
)
from microasm.errors import BadInputError, ConfigError, MicroASMError
from microasm.evaluation.metrics import AnnotationSheet, accuracy, cohen_kappa, shannon_diversity, specificity
from microasm.evaluation.synthetic import generate_synthetic, planted_spec
from microasm.lexicon import build_beta, load_lexicon
from microasm.modelio import ModelFile, load_model, save_model
from microasm.posterior import UNCLASSIFIABLE, classify_document, classify_probs, posterior, top_terms
from microasm.sampler import Hyperparams, _kernels, fold_in, train_chains

logger = logging.getLogger("microasm")


def _read_words(path: str | None) -> frozenset[str] | None:
    if path is None:
        return None
    try:
        return frozenset(w.strip().lower() for w in Path(path).read_text(encoding="utf-8").split() if w.strip())
    except OSError as exc:
        raise BadInputError(f"cannot read word list {path}: {exc}") from exc


def _read_raw(path: str, fmt: str, strict: bool):
    if fmt == "auto":
        fmt = "jsonl" if str(path).endswith((".jsonl", ".json")) else "text"
    try:
        return (read_jsonl(path, strict) if fmt == "jsonl" else read_plain(path, strict)), fmt
    except OSError as exc:
        raise BadInputError(f"cannot read {path}: {exc}") from exc


def _prep_options(args, pretokenized: bool) -> PrepOptions:
    return PrepOptions(
        lowercase=not args.keep_case,
        stopwords=_read_words(args.stopwords) or frozenset(),
        negators=_read_words(args.negators) or DEFAULT_NEGATORS,
        negation_window=args.negation_window,
        pair_window=args.window,
        rating_threshold=args.rating_threshold,
        pretokenized=pretokenized,
    )


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _config_from_args(args) -> Config:
    cfg = Config()
    for name in vars(cfg):
        if name != "paths" and hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    cfg.paths = {k: getattr(args, k) for k in ("input", "corpus", "model", "output", "report")
                 if getattr(args, k, None) is not None}
    cfg.verbosity = logging.getLevelName(logging.getLogger().level)
    cfg.validate()
    return cfg


def cmd_prep(args) -> int:
    raws, fmt = _read_raw(args.input, args.format, args.strict)
    opts = _prep_options(args, pretokenized=fmt == "text")
    corpus = build_corpus(raws, opts)
    save_corpus(corpus, args.output)
    summary = {**corpus.stats(), "dropped_ids": [d.id for d in corpus.dropped]}
    print(dumps(summary))
    return 0


def _lexicon_source(value):
    if value is None:
        return None
    if len(value) == 1:
        return value[0]
    if len(value) == 2:
        return tuple(value)
    raise ConfigError("--lexicon takes a JSON file or two word-list files (positive, negative)")


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    corpus = load_corpus(args.corpus)
    lexicon = load_lexicon(_lexicon_source(args.lexicon))
    beta = build_beta(lexicon, corpus.vocabulary, cfg.beta_base, cfg.beta_seed, cfg.sentiments)
    hp = Hyperparams(alpha=cfg.alpha, gamma=cfg.gamma, delta=cfg.delta, beta=beta,
                     num_clusters=cfg.clusters, num_topics=cfg.topics, num_sentiments=cfg.sentiments,
                     iterations=cfg.iterations, burn_in=cfg.burn_in, seed=cfg.seed,
                     strict_cluster_formula=cfg.strict_cluster_formula, point_estimate=cfg.point_estimate)
    hp.validate(corpus.vocab_size)
    state, report, chain = train_chains(corpus, hp, cfg.chains, debug=args.debug)
    # output locations stay out of the model so identical runs give identical files
    model_cfg = cfg.to_dict()
    model_cfg["paths"] = {k: v for k, v in model_cfg["paths"].items() if k not in ("output", "report")}
    checksum = save_model(ModelFile(state, hp, corpus, lexicon, model_cfg), args.output)
    report_path = args.report or str(Path(args.output).with_suffix(".report.jsonl"))
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(dumps({"type": "config", "config": cfg.to_dict(), "hyperparams": hp.to_dict(),
                       "chain": chain, "unconstrained_pairs": report.unconstrained_pairs,
                       "model_checksum": checksum}) + "\n")
        for s in report.sweeps:
            f.write(dumps({"type": "sweep", **vars(s)}) + "\n")
    print(dumps({"model": args.output, "report": report_path, "checksum": checksum, "chain": chain,
                 "sweeps": len(report.sweeps), "final_log_joint": report.final_log_joint}))
    return 0


def cmd_topics(args) -> int:
    model = load_model(args.model)
    view = posterior(model.state, model.hyperparams, point_estimate=args.point_estimate or None)
    terms = top_terms(view, model.corpus.vocabulary, args.k)
    if args.format == "json":
        obj = {"config": model.config, "k": args.k, "source": view.source,
               "topics": [{"sentiment": s, "topic": z, "terms": [{"word": w, "probability": p} for w, p in ranked]}
                          for (s, z), ranked in sorted(terms.terms.items())]}
        _emit(obj, args.output)
        return 0
    lines = ["# config " + dumps(model.config), "sentiment\ttopic\trank\tword\tprobability"]
    lines += [f"{s}\t{z}\t{r}\t{w}\t{p:.10g}" for s, z, r, w, p in terms.rows()]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _fold_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2, k)))


def classify_model_documents(model: ModelFile, raws=None, burn_in: int = 50, samples: int = 20):
    """Yield (doc_id, Classification). Without ``raws`` the training documents are
    classified from the posterior and dropped (pair-less) ones by fold-in."""
    state, hp, corpus = model.state, model.hyperparams, model.corpus
    vocab = corpus.vocabulary
    window = corpus.options.pair_window
    if raws is None:
        for d, doc in enumerate(corpus.documents):
            yield doc.id, classify_document(state, hp, d)
        for k, doc in enumerate(corpus.dropped):
            res = fold_in(state, hp, list(doc.tokens), window=window, burn_in=burn_in, samples=samples,
                          rng=_fold_rng(hp.seed, k))
            yield doc.id, classify_document(res, hp)
        return
    for k, raw in enumerate(raws):
        ids = [vocab.get(w) for w in preprocess(raw, corpus.options)]
        res = fold_in(state, hp, ids, window=window, burn_in=burn_in, samples=samples, rng=_fold_rng(hp.seed, k))
        yield raw.id, classify_document(res, hp) if res.classifiable else UNCLASSIFIABLE


def cmd_classify(args) -> int:
    model = load_model(args.model)
    if model.hyperparams.num_sentiments != 2:
        raise ConfigError("classification needs a two-sentiment model")
    raws = None
    if args.input:
        raws, _ = _read_raw(args.input, args.format, args.strict)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        out.write(dumps({"config": model.config}) + "\n")
        for doc_id, result in classify_model_documents(model, raws, args.fold_burn_in, args.fold_samples):
            out.write(dumps(result.to_record(doc_id)) + "\n")
        if args.cluster_posterior:
            view = posterior(model.state, model.hyperparams, cluster_posterior=True)
            for c, p in enumerate(view.cluster_sentiment):
                r = classify_probs(p)
                out.write(dumps({"cluster": c, "p_pos": r.p_pos, "p_neg": r.p_neg, "label": r.label,
                                 "tie": r.tie}) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def read_predictions(path: str) -> dict[str, str | None]:
    preds = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            if "id" not in rec:
                continue  # config header or cluster diagnostics
            label = rec.get("label")
            preds[str(rec["id"])] = None if label in (None, "unclassifiable") else label
    return preds


def read_gold(path: str, threshold: float) -> dict[str, str | None]:
    if str(path).endswith(".jsonl"):
        return {r.id: gold_label(r, threshold) for r in read_jsonl(path, strict=True)}
    corpus = load_corpus(path)
    return {d.id: d.gold for d in corpus.documents + corpus.dropped}


def cmd_eval(args) -> int:
    try:
        preds = read_predictions(args.predictions)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read predictions {args.predictions}: {exc}") from exc
    res = accuracy(preds, read_gold(args.gold, args.rating_threshold))
    _emit({"accuracy": res.accuracy, "correct": res.correct, "evaluated": res.evaluated,
           "unclassifiable": res.unclassifiable,
           "config": {"predictions": args.predictions, "gold": args.gold, "rating_threshold": args.rating_threshold}},
          args.output)
    return 0


def cmd_metrics(args) -> int:
    sheet = AnnotationSheet.from_csv(args.sheet)
    labels = sheet.pooled_labels()
    kappa = cohen_kappa(sheet, published_formula=args.published_kappa)
    _emit({"diversity": shannon_diversity(labels, args.log_base), "specificity": specificity(labels),
           "kappa": kappa.kappa, "kappa_degenerate": kappa.degenerate, "n": len(labels), "pooled": True,
           "config": {"sheet": args.sheet, "published_kappa": args.published_kappa, "log_base": args.log_base}},
          args.output)
    return 0


def cmd_synth(args) -> int:
    spec = planted_spec(num_docs=args.docs, vocab_size=args.vocab, num_clusters=args.clusters,
                        num_topics=args.topics, num_seeds=args.num_seeds, seed_mass=args.seed_mass,
                        mean_pairs=args.mean_pairs, seed=args.seed)
    corpus, truth = generate_synthetic(spec)
    save_corpus(corpus, args.output)
    sidecar = truth.to_dict()
    sidecar["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    sidecar["lexicon"] = spec.lexicon().to_dict()
    truth_path = args.truth or str(Path(args.output).with_suffix(".truth.json"))
    Path(truth_path).write_text(dumps(sidecar) + "\n", encoding="utf-8")
    if args.lexicon_out:
        Path(args.lexicon_out).write_text(dumps(spec.lexicon().to_dict()) + "\n", encoding="utf-8")
    print(dumps({"corpus": args.output, "truth": truth_path, **corpus.stats()}))
    return 0


def cmd_clusters(args) -> int:
    model = load_model(args.model)
    state, hp, corpus = model.state, model.hyperparams, model.corpus
    C = hp.num_clusters
    D = state.num_documents
    const = np.log(D - 1 + C * hp.delta) if D > 1 else 0.0
    scores = np.empty(D)
    logw = np.empty(C)
    for d in range(D):
        c = state.cluster_of_doc[d]
        state.n_cluster[c] -= 1
        state.n_cs[c] -= state.n_ds[d]
        state.n_cst[c] -= state.n_dst[d]
        _kernels.cluster_log_weights(state.n_cluster, state.n_cs, state.n_cst, state.n_ds[d], state.n_dst[d],
                                     hp.alpha, hp.gamma, hp.delta, hp.strict_cluster_formula, logw)
        state.n_cluster[c] += 1
        state.n_cs[c] += state.n_ds[d]
        state.n_cst[c] += state.n_dst[d]
        scores[d] = logw[c] - const
    top = {}
    for c in range(C):
        members = np.flatnonzero(state.cluster_of_doc == c)
        ranked = members[np.argsort(-scores[members], kind="stable")][: args.top]
        if members.size:
            top[str(c)] = [{"id": corpus.documents[d].id, "log_prob": float(scores[d])} for d in ranked]
    _emit({"config": model.config,
           "doc_cluster": {doc.id: int(state.cluster_of_doc[d]) for d, doc in enumerate(corpus.documents)},
           "sizes": state.n_cluster.tolist(), "top_documents": top}, args.output)
    return 0


def _add_prep_flags(p):
    p.add_argument("--window", type=int, default=5, help="pair window")
    p.add_argument("--negation-window", type=int, default=5)
    p.add_argument("--rating-threshold", type=float, default=3.0,
                   help="ratings below this are negative (3 for 5-star Yelp, 5 for 10-point Naver)")
    p.add_argument("--stopwords", help="file of stopwords, whitespace separated")
    p.add_argument("--negators", help="file of negating words, replaces the default list")
    p.add_argument("--keep-case", action="store_true")


class _Parser(argparse.ArgumentParser):
    """Usage errors get the machine-readable line too (they are config errors)."""

    def error(self, message):
        sys.stderr.write(f"microasm-error code=usage exit=3\n{self.prog}: {message}\n")
        self.print_usage(sys.stderr)
        sys.exit(3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="microasm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="raw reviews -> corpus JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("auto", "jsonl", "text"), default="auto")
    p.add_argument("--strict", action="store_true", help="abort on the first malformed line")
    _add_prep_flags(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("train", help="corpus JSON -> model JSON + sweep report")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--beta-base", type=float, default=0.01)
    p.add_argument("--beta-seed", type=float, default=0.1)
    p.add_argument("--clusters", type=int, default=500)
    p.add_argument("--topics", type=int, default=15)
    p.add_argument("--sentiments", type=int, default=2)
    p.add_argument("--iterations", type=int, default=1500)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--window", type=int, default=5, help="recorded in the config; pairs come from the corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--strict-paper-eq3", dest="strict_cluster_formula", action="store_true",
                   help="cluster conditional without +delta, products from y=0, one pooled aspect normalizer")
    p.add_argument("--point-estimate", action="store_true", help="use the final sample, not the average")
    p.add_argument("--lexicon", nargs="+", help="JSON lexicon, or positive and negative word-list files")
    p.add_argument("--debug", action="store_true", help="verify all counts after every sweep")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("topics", help="top terms per (sentiment, topic)")
    p.add_argument("model")
    p.add_argument("-k", type=int, default=20)
    p.add_argument("--format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--point-estimate", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_topics)

    p = sub.add_parser("classify", help="document sentiment labels as JSON Lines")
    p.add_argument("model")
    p.add_argument("--input", help="held-out reviews to fold in (JSONL or text); default: training documents")
    p.add_argument("--format", choices=("auto", "jsonl", "text"), default="auto")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--fold-burn-in", type=int, default=50)
    p.add_argument("--fold-samples", type=int, default=20)
    p.add_argument("--cluster-posterior", action="store_true", help="also report cluster-level sentiment")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="accuracy of classify output against gold labels")
    p.add_argument("predictions")
    p.add_argument("--gold", required=True, help="corpus JSON or raw JSONL with label/rating")
    p.add_argument("--rating-threshold", type=float, default=3.0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("metrics", help="diversity, specificity and kappa of an annotation sheet")
    p.add_argument("sheet", help="CSV with header sentiment,topic,annotator,label")
    p.add_argument("--paper-kappa", dest="published_kappa", action="store_true", help="use the published agreeability expression")
    p.add_argument("--log-base", type=float, default=None, help="log base for diversity (default e)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", help="planted synthetic corpus + ground truth")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--truth")
    p.add_argument("--lexicon-out")
    p.add_argument("--docs", type=int, default=2000)
    p.add_argument("--vocab", type=int, default=200)
    p.add_argument("--clusters", type=int, default=5)
    p.add_argument("--topics", type=int, default=5)
    p.add_argument("--num-seeds", type=int, default=5)
    p.add_argument("--seed-mass", type=float, default=0.1)
    p.add_argument("--mean-pairs", type=float, default=6.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("clusters", help="document -> cluster map, sizes, top documents")
    p.add_argument("model")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_clusters)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("MICROASM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MicroASMError as exc:
        sys.stderr.write(f"microasm-error code={exc.code} exit={exc.exit_code}\n{exc}\n")
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"microasm-error code=bad_input exit=2\n{exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
