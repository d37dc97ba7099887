from .graph import VARIANTS, BuildParams, BuildStats, Mrpg, count_components
from .monotonic import (
    MSG_ORACLE_LIMIT,
    DetourPair,
    build_msg_oracle,
    chain_link,
    get_non_monotonic,
    monotone_path_density,
)
from .mrpg import (
    ann_search,
    build_mrpg,
    connect_subgraphs,
    remove_detours,
    remove_links,
    symmetrize,
)
from .nndescent import AknnGraph, descend, exact_knn, nndescent, nndescent_plus

__all__ = [
    "AknnGraph",
    "BuildParams",
    "BuildStats",
    "DetourPair",
    "MSG_ORACLE_LIMIT",
    "Mrpg",
    "VARIANTS",
    "ann_search",
    "build_mrpg",
    "build_msg_oracle",
    "chain_link",
    "connect_subgraphs",
    "count_components",
    "descend",
    "exact_knn",
    "get_non_monotonic",
    "monotone_path_density",
    "nndescent",
    "nndescent_plus",
    "remove_detours",
    "remove_links",
    "symmetrize",
]
