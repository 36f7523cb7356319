"""Versioned JSON model files; counts are rebuilt from assignments on load and checked."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from microasm.corpus import Corpus, corpus_from_dict, corpus_to_dict, dumps
from microasm.errors import BadInputError, ChecksumError, VersionMismatchError
from microasm.lexicon import SeedLexicon, build_beta
from microasm.sampler import ACC_FIELDS, COUNT_FIELDS, Hyperparams, ModelState, state_from_assignments

MODEL_FORMAT_VERSION = 1


@dataclass
class ModelFile:
    state: ModelState
    hyperparams: Hyperparams
    corpus: Corpus
    lexicon: SeedLexicon
    config: dict


def _array_digest(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a, dtype="<i8").tobytes()).hexdigest()


def _content_digest(payload: dict) -> str:
    return hashlib.sha256(dumps(payload).encode("utf-8")).hexdigest()


def model_to_dict(model: ModelFile) -> dict:
    state, hp = model.state, model.hyperparams
    payload = {
        "version": MODEL_FORMAT_VERSION,
        "config": model.config,
        "hyperparams": hp.to_dict(),
        "beta_rules": {"base": hp.beta.base, "seed_match": hp.beta.seed_match, **model.lexicon.to_dict()},
        "corpus": corpus_to_dict(model.corpus),
        "assignments": {
            "cluster_of_doc": state.cluster_of_doc.tolist(),
            "sentiment": state.assign_s.tolist(),
            "topic": state.assign_z.tolist(),
        },
        "accumulators": {"n_samples": state.n_samples,
                         **{name: getattr(state, name).ravel().tolist() for name in ACC_FIELDS}},
        "rng_seed": hp.seed,
        "sweeps": state.sweeps_done,
        "fallbacks": state.fallbacks.tolist(),
        "count_checksums": {name: _array_digest(getattr(state, name)) for name in COUNT_FIELDS},
    }
    payload["checksum"] = _content_digest(payload)
    return payload


def model_from_dict(data: dict) -> ModelFile:
    version = data.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise VersionMismatchError(f"unsupported model format version {version!r}")
    data = dict(data)
    stored = data.pop("checksum", None)
    if stored != _content_digest(data):
        raise ChecksumError("model file content checksum does not match")

    corpus = corpus_from_dict(data["corpus"])
    rules = data["beta_rules"]
    lexicon = SeedLexicon(frozenset(rules["positive"]), frozenset(rules["negative"]))
    hpd = dict(data["hyperparams"])
    hpd.pop("beta_base", None)
    hpd.pop("beta_seed", None)
    beta = build_beta(lexicon, corpus.vocabulary, rules["base"], rules["seed_match"], hpd["num_sentiments"])
    hp = Hyperparams(beta=beta, **hpd)

    a = data["assignments"]
    state = state_from_assignments(corpus, hp, a["cluster_of_doc"], a["sentiment"], a["topic"])
    for name, digest in data["count_checksums"].items():
        if _array_digest(getattr(state, name)) != digest:
            raise ChecksumError(f"recomputed {name} does not match the stored checksum")
    acc = data["accumulators"]
    for name in ACC_FIELDS:
        target = getattr(state, name)
        values = np.asarray(acc[name], dtype=np.int64)
        if values.size != target.size:
            raise BadInputError(f"accumulator {name} has the wrong size")
        target[...] = values.reshape(target.shape)
    state.n_samples = int(acc["n_samples"])
    state.sweeps_done = int(data["sweeps"])
    state.fallbacks[:] = data["fallbacks"]
    return ModelFile(state, hp, corpus, lexicon, data["config"])


def save_model(model: ModelFile, path: str | Path) -> str:
    """Write the model; returns its content checksum."""
    payload = model_to_dict(model)
    Path(path).write_text(dumps(payload) + "\n", encoding="utf-8")
    return payload["checksum"]


def load_model(path: str | Path) -> ModelFile:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)

