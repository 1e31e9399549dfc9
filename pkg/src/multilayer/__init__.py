"""Link-configuration laws of random multilayer networks."""

from .model import (BaseGraph, LinkConfiguration, ModelError, ModelParams, SizeCapError,
                    parse_graph, parse_params, validate_model)
from .exact_line import LineSpec, expected_active_links, expected_cluster_size
from .exact_tree import tree_config_prob
from .exact_general import brute_force_dist, merge_recursion
from .feasibility import mcc_feasible
from .montecarlo import SimConfig, simulate

__all__ = [
    "BaseGraph", "LinkConfiguration", "ModelError", "ModelParams", "SizeCapError",
    "parse_graph", "parse_params", "validate_model",
    "LineSpec", "expected_active_links", "expected_cluster_size",
    "tree_config_prob", "brute_force_dist", "merge_recursion",
    "mcc_feasible", "SimConfig", "simulate",
]
__version__ = "0.1.0"
