"""Point-cloud skeletonisation: HoPeS, Mapper and alpha-Reeb graphs."""

__version__ = "0.1.0"

from .geometry import PointCloud, load_cloud, save_cloud, delaunay, neighbourhood_graph
from .filtration import Filtration, alpha_filtration, rips_filtration, build_filtration
from .persistence import (
    PersistenceDiagram,
    compute_persistence,
    bottleneck_distance,
    diagonal_gaps,
    vertical_gaps,
)
from .skeleton import SkeletonGraph
from .hopes import (
    minimum_spanning_tree,
    build_hopes,
    reduced_hopes,
    derived_hopes,
    prune_degree_one,
    simplify,
    simhopes,
    graph_thickness,
    hopes_of_cloud,
)
from .baselines import dbscan, mapper, MapperConfig, alpha_reeb
from .synth import make_pattern, parse_pattern, sample_points, apply_noise, NoiseModel, DatasetSpec, generate_dataset
from .evaluate import is_homeomorphic, rms_distance, run_benchmark

__all__ = [
    "PointCloud",
    "load_cloud",
    "save_cloud",
    "delaunay",
    "neighbourhood_graph",
    "Filtration",
    "alpha_filtration",
    "rips_filtration",
    "build_filtration",
    "PersistenceDiagram",
    "compute_persistence",
    "bottleneck_distance",
    "diagonal_gaps",
    "vertical_gaps",
    "SkeletonGraph",
    "minimum_spanning_tree",
    "build_hopes",
    "reduced_hopes",
    "derived_hopes",
    "prune_degree_one",
    "simplify",
    "simhopes",
    "graph_thickness",
    "hopes_of_cloud",
    "dbscan",
    "mapper",
    "MapperConfig",
    "alpha_reeb",
    "make_pattern",
    "parse_pattern",
    "sample_points",
    "apply_noise",
    "NoiseModel",
    "DatasetSpec",
    "generate_dataset",
    "is_homeomorphic",
    "rms_distance",
    "run_benchmark",
]
