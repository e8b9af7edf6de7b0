"""Clustering and classification of p-adic data on dendrograms."""

from .centers import brute_force_centers, center_candidates
from .clustering import quasi_verticial_clustering, split_lbg, verticial_clustering
from .dendrogram import AbstractDendrogram, Dendrogram, build, build_extended, parse_tree, synthesize
from .energy import EnergyValue, compare, delta, family_energy, gradient_polynomial, vertex_energy
from .learning import Classification, Classifier, adaptive_learn, learn, verify_classifier
from .padic import FieldParams, NormValue, PAdicValue, distance, encode_integer, norm, parse_value
from .pranking import asymptotic_ranking, p_ranking, ranking_table, stabilization_bound

__version__ = "0.1.0"

__all__ = [
    "AbstractDendrogram", "Classification", "Classifier", "Dendrogram", "EnergyValue",
    "FieldParams", "NormValue", "PAdicValue", "adaptive_learn", "asymptotic_ranking",
    "brute_force_centers", "build", "build_extended", "center_candidates", "compare", "delta",
    "distance", "encode_integer", "family_energy", "gradient_polynomial", "learn", "norm",
    "p_ranking", "parse_tree", "parse_value", "quasi_verticial_clustering", "ranking_table",
    "split_lbg", "stabilization_bound", "synthesize", "verify_classifier", "verticial_clustering",
    "vertex_energy",
]
