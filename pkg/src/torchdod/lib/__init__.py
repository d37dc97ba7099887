from .neighbor_list import NeighborList, neighbor_ids
from .parallel import map_chunks, map_tasks, split_chunks
from .seeding import make_generator, spawn_seed, spawn_seeds
from .visit_marker import VisitMarker
from .vptree import Partition, VpNode, VpTree, build_vptree, partition_for_init

__all__ = [
    "NeighborList",
    "Partition",
    "VisitMarker",
    "VpNode",
    "VpTree",
    "build_vptree",
    "make_generator",
    "map_chunks",
    "map_tasks",
    "neighbor_ids",
    "partition_for_init",
    "spawn_seed",
    "spawn_seeds",
    "split_chunks",
]
