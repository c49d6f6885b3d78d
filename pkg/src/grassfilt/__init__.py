"""Grassmann interpolation of low-pass graph filters over parametric graph families."""

from .classify import (
    LowPassFilterClassifier,
    SplitSpec,
    TapsFit,
    evaluate_accuracy,
    learn_taps,
    make_split,
    predict_binary,
    predict_multiclass,
    select_delta,
)
from .csbm import (
    CsbmConfig,
    CsbmTrajectory,
    cos_d,
    expected_adjacency,
    sample_csbm_graph,
    sample_features,
    similarity_correction,
)
from .dpg import DotProductGraph, DpgEmbedding, delta_range, dpg_at_threshold, spectral_embedding
from .filters import (
    FactoredFilter,
    GraphFilterInterpolator,
    apply_filter,
    build_lowpass,
    filter_distance,
    interpolate_filter,
    rayleigh_ritz_align,
    vandermonde,
)
from .graph import Graph, ShiftKind, build_graph, karate_club, knn_graph, shift_operator
from .grassmann import (
    TangentVector,
    exp_sensitivity_probe,
    geodesic_distance,
    grassmann_exp,
    grassmann_log,
    projector_distance,
)
from .interpolation import (
    AnchorSet,
    SubspaceInterpolator,
    build_anchor_set,
    chebyshev_nodes,
    choose_base_point,
    interpolate_subspace,
    lagrange_basis,
)
from .spectral import SpectralPair, extremal_eigenpairs, thin_svd

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "apply_filter",
    "build_anchor_set",
    "build_graph",
    "build_lowpass",
    "chebyshev_nodes",
    "choose_base_point",
    "cos_d",
    "CsbmConfig",
    "CsbmTrajectory",
    "delta_range",
    "DotProductGraph",
    "dpg_at_threshold",
    "DpgEmbedding",
    "evaluate_accuracy",
    "exp_sensitivity_probe",
    "expected_adjacency",
    "extremal_eigenpairs",
    "FactoredFilter",
    "filter_distance",
    "geodesic_distance",
    "Graph",
    "GraphFilterInterpolator",
    "grassmann_exp",
    "grassmann_log",
    "interpolate_filter",
    "interpolate_subspace",
    "karate_club",
    "knn_graph",
    "lagrange_basis",
    "learn_taps",
    "LowPassFilterClassifier",
    "make_split",
    "predict_binary",
    "predict_multiclass",
    "projector_distance",
    "rayleigh_ritz_align",
    "sample_csbm_graph",
    "sample_features",
    "select_delta",
    "shift_operator",
    "ShiftKind",
    "similarity_correction",
    "spectral_embedding",
    "SpectralPair",
    "SplitSpec",
    "SubspaceInterpolator",
    "TangentVector",
    "TapsFit",
    "thin_svd",
    "vandermonde",
]
