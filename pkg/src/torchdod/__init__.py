from . import data, detectors, graphs, lib, metrics, utils
from .data import Dataset, load_dataset, read_graph, write_graph
from .detectors import (
    DodParams,
    DodResult,
    GraphDetector,
    NestedLoopDetector,
    VpTreeDetector,
    detect,
    detect_partitioned,
)
from .errors import ConfigurationError, ConsistencyError, DatasetFormatError
from .graphs import BuildParams, Mrpg, build_mrpg
from .lib import VpTree
from .oracle import OracleReport, brute_force_outliers

__all__ = [
    "BuildParams",
    "ConfigurationError",
    "ConsistencyError",
    "Dataset",
    "DatasetFormatError",
    "DodParams",
    "DodResult",
    "GraphDetector",
    "Mrpg",
    "NestedLoopDetector",
    "OracleReport",
    "VpTree",
    "VpTreeDetector",
    "brute_force_outliers",
    "build_mrpg",
    "data",
    "detect",
    "detect_partitioned",
    "detectors",
    "graphs",
    "lib",
    "load_dataset",
    "metrics",
    "read_graph",
    "utils",
    "write_graph",
]
__version__ = "0.1.0"
