"""Metrics, synthetic data and the exact-enumeration oracle."""

from microasm.evaluation.metrics import (
    AccuracyResult,
    AnnotationSheet,
    KappaResult,
    accuracy,
    cohen_kappa,
    matched_purity,
    nmi,
    shannon_diversity,
    specificity,
)
from microasm.evaluation.oracle import (
    ExactPosterior,
    FullAssignment,
    cluster_conditional_from_joint,
    collapsed_joint_logprob,
    enumerate_assignments,
    exact_marginals,
    pair_conditional_from_joint,
)
from microasm.evaluation.synthetic import GroundTruth, SyntheticSpec, generate_synthetic, planted_spec

__all__ = [
    "AccuracyResult", "AnnotationSheet", "ExactPosterior", "FullAssignment", "GroundTruth", "KappaResult",
    "SyntheticSpec", "accuracy", "cluster_conditional_from_joint", "cohen_kappa", "collapsed_joint_logprob", "enumerate_assignments",
    "exact_marginals", "generate_synthetic", "matched_purity", "nmi", "pair_conditional_from_joint", "planted_spec",
    "shannon_diversity", "specificity",
]
