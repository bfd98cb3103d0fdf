"""Subquadratic search for strong pairwise interactions, and an interaction Lasso built on it."""

from .bitmatrix import (
    PackedMatrix,
    WeightedSampler,
    build_z,
    cap_entries,
    interaction_strength,
    interaction_strengths,
    rescale_rows,
    sign_transform,
    unbiased_transform_sample,
    weighted_interaction_strength,
)
from .pairs import CandidatePairSet, InteractionHit, close_pairs, equal_pairs, filter_strong
from .projection import (
    DenseProjection,
    SubsampleDraw,
    draw_subsample,
    gauss_tau_for_budget,
    project_dense,
    project_keys,
)
from .search import (
    SearchConfig,
    SearchReport,
    StrengthSample,
    choose_L,
    choose_parameters,
    discovery_probability,
    expected_complexity,
    optimal_M,
    runtime_exponent,
    sample_strengths,
    xyz_search,
)

__version__ = "0.1.0"
