"""MicroASM: a cluster-and-pair aspect-sentiment topic model for short reviews."""

from microasm.corpus import Corpus, Document, RawDocument, Vocabulary, build_corpus
from microasm.lexicon import BetaPrior, SeedLexicon, build_beta, load_lexicon
from microasm.sampler import Hyperparams, ModelState, TrainReport, fold_in, train
from microasm.posterior import PosteriorView, classify_document, posterior, top_terms

__version__ = "0.1.0"

__all__ = [
    "BetaPrior",
    "Corpus",
    "Document",
    "Hyperparams",
    "ModelState",
    "PosteriorView",
    "RawDocument",
    "SeedLexicon",
    "TrainReport",
    "Vocabulary",
    "build_beta",
    "build_corpus",
    "classify_document",
    "fold_in",
    "load_lexicon",
    "posterior",
    "top_terms",
    "train",
]
