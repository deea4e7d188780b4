"""Dual bounds for multicommodity capacitated network design with unsplittable flow."""

from .arcset import ArcSet, arc_sets, make_arc_set
from .bench import ConfigLadderEntry, load_reference, run_ladder
from .canad import parse_canad, read_canad
from .ecommerce import EcommerceGenParams, LtlCostTable, gen_group, generate_ecommerce
from .gensacpack import rowgen_separate
from .icg import IcgConfig, IcgReport, run_icg
from .instance import Arc, Commodity, Instance, InstanceError, Node, Path, read_canonical, write_canonical
from .knapsack import alpha_coefficients, min_knapsack_bisect
from .metric import aggregate, generate_metric_cuts, lagrangian_loop
from .model import (
    Cut,
    ModelSpec,
    add_disaggregated_linking,
    build_arc_fixed_model,
    build_bin_model,
    build_int_model,
    compute_gap,
    compute_improvement,
)
from .oracle import enumerate_S, validate_cut
from .sacpack import postprocess_lift, saturate, separate_sacpack
from .solver import get_backend, solve_lp, solve_mip

__version__ = "0.1.0"

__all__ = [
    "Arc",
    "ArcSet",
    "Commodity",
    "ConfigLadderEntry",
    "Cut",
    "EcommerceGenParams",
    "IcgConfig",
    "IcgReport",
    "Instance",
    "InstanceError",
    "LtlCostTable",
    "ModelSpec",
    "Node",
    "Path",
    "add_disaggregated_linking",
    "aggregate",
    "alpha_coefficients",
    "arc_sets",
    "build_arc_fixed_model",
    "build_bin_model",
    "build_int_model",
    "compute_gap",
    "compute_improvement",
    "enumerate_S",
    "gen_group",
    "generate_ecommerce",
    "generate_metric_cuts",
    "get_backend",
    "lagrangian_loop",
    "load_reference",
    "make_arc_set",
    "min_knapsack_bisect",
    "parse_canad",
    "postprocess_lift",
    "read_canad",
    "read_canonical",
    "rowgen_separate",
    "run_icg",
    "run_ladder",
    "saturate",
    "separate_sacpack",
    "solve_lp",
    "solve_mip",
    "validate_cut",
    "write_canonical",
]
