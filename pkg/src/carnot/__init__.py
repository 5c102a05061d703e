"""Carnot-group arithmetic and a certified bi-Lipschitz decomposition pipeline."""

from .algebra import GroupPoint, StratifiedAlgebra, homogeneous_dimension
from .coarse import AlphaParams, alpha_all, alpha_ball, alpha_cube, carleson_sum
from .config import RunConfig, load_config, validate_config
from .content import (
    ContentEstimate,
    NetCover,
    content_upper,
    epsilon_net_cover,
    radius_grid_for,
    weak_bilip_check,
)
from .cubes import (
    Cube,
    CubeTree,
    audit_cube_tree,
    build_cube_tree,
    dilate_cube,
    estimate_b,
    hat_cube,
    hat_points,
    smallest_cube_2Q,
)
from .decompose import (
    AlphabetExhausted,
    BadFamilies,
    Coding,
    Decomposition,
    assign_words,
    certify,
    choose_l,
    classify_bad_cubes,
    compute_R2,
    decompose,
    effective_l,
    neighbor_family,
)
from .discreteness import (
    ExampleParams,
    build_example_algebra,
    density_probe,
    discreteness_certificate,
    mobius_rationality,
)
from .homs import (
    Homomorphism,
    apply_hom,
    collapse_witness,
    hom_from_first_layer,
    one_lipschitz_rescale,
)
from .lattice import GradedLattice, build_lattice, covering_radius
from .maps import LipschitzMapSample, TargetMetric, map_preset
from .norms import NormConfig, default_norm_config, dist_infty, norm_infty, sample_ball
from .presets import algebra_preset, load_group

__all__ = [
    "AlphaParams",
    "AlphabetExhausted",
    "BadFamilies",
    "Coding",
    "ContentEstimate",
    "Cube",
    "CubeTree",
    "Decomposition",
    "ExampleParams",
    "GradedLattice",
    "GroupPoint",
    "Homomorphism",
    "LipschitzMapSample",
    "NetCover",
    "NormConfig",
    "RunConfig",
    "StratifiedAlgebra",
    "TargetMetric",
    "alpha_all",
    "alpha_ball",
    "alpha_cube",
    "algebra_preset",
    "apply_hom",
    "assign_words",
    "audit_cube_tree",
    "build_cube_tree",
    "build_example_algebra",
    "build_lattice",
    "carleson_sum",
    "certify",
    "choose_l",
    "classify_bad_cubes",
    "collapse_witness",
    "compute_R2",
    "content_upper",
    "covering_radius",
    "decompose",
    "default_norm_config",
    "density_probe",
    "dilate_cube",
    "discreteness_certificate",
    "dist_infty",
    "effective_l",
    "epsilon_net_cover",
    "estimate_b",
    "hat_cube",
    "hat_points",
    "hom_from_first_layer",
    "homogeneous_dimension",
    "load_config",
    "load_group",
    "map_preset",
    "mobius_rationality",
    "neighbor_family",
    "norm_infty",
    "one_lipschitz_rescale",
    "radius_grid_for",
    "sample_ball",
    "smallest_cube_2Q",
    "validate_config",
    "weak_bilip_check",
]
