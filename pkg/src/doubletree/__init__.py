"""Minimum-weight double-tree shortcutting heuristics for Metric TSP.

Pipeline: build an instance, take its minimum spanning tree, root it at a
degree-1 node, optionally enlarge the admissible-tour space by reattaching
children under a degree cap, then run the subset dynamic program (upsweep)
and reconstruct the optimal admissible tour (downsweep).
"""

from .downsweep import (
    LayeredGraph,
    Tour,
    downsweep,
    layered_shortest_path,
    reconstruct_path,
    write_tour_plain,
    write_tour_tsplib,
)
from .errors import (
    ConfigError,
    DoubleTreeError,
    GuardError,
    InternalInvariantError,
    ParseError,
)
from .hk_bound import held_karp_lower_bound
from .instances import (
    Instance,
    Metric,
    MetricKind,
    Point,
    cycle_weight,
    distance,
    generate_clustered,
    generate_uniform,
    parse_tsplib,
    write_tsplib,
)
from .oracles import (
    brute_force_optimal,
    depth_first_shortcut,
    enumerate_conforming_min,
    is_conforming,
)
from .spanning_tree import (
    RootedTree,
    TreeEdge,
    degree_increase,
    minimum_spanning_tree,
    root_tree,
    tree_distance,
    tree_weight,
)
from .upsweep import BipartitionTable, UpsweepResult, UpsweepRun, upsweep

__version__ = "0.1.0"

__all__ = [
    "BipartitionTable",
    "ConfigError",
    "DoubleTreeError",
    "GuardError",
    "Instance",
    "InternalInvariantError",
    "LayeredGraph",
    "Metric",
    "MetricKind",
    "ParseError",
    "Point",
    "RootedTree",
    "Tour",
    "TreeEdge",
    "UpsweepResult",
    "UpsweepRun",
    "brute_force_optimal",
    "cycle_weight",
    "degree_increase",
    "depth_first_shortcut",
    "distance",
    "downsweep",
    "enumerate_conforming_min",
    "generate_clustered",
    "generate_uniform",
    "held_karp_lower_bound",
    "is_conforming",
    "layered_shortest_path",
    "minimum_spanning_tree",
    "parse_tsplib",
    "reconstruct_path",
    "root_tree",
    "tree_distance",
    "tree_weight",
    "upsweep",
    "write_tour_plain",
    "write_tour_tsplib",
    "write_tsplib",
]
