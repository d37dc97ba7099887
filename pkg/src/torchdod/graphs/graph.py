import math
import warnings
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from typing import Optional

from ..errors import ConfigurationError
from ..lib import NeighborList

VARIANTS = ("mrpg", "mrpg-basic", "kgraph")


@dataclass(frozen=True)
class BuildParams:
    r"""
    Parameters of graph construction. Optional fields take defaults derived from
    ``K`` and the number of objects ``n`` when resolved with :meth:`resolve`.

    :param K: number of approximate nearest neighbors per object.
    :param K_prime: length of the exact nearest-neighbor lists, ``4 * K`` by default.
    :param m: number of objects receiving exact lists, ``max(ceil(n / 1000), 10)`` by
        default (never more than ``n``).
    :param max_iters: maximum number of NNDescent iterations.
    :param repeats: number of VP-trees used for the partition initialization.
    :param capacity: leaf capacity of those VP-trees, at least 2, ``2 * K`` by default.
    :param v_piv_size: number of visited pivots used as extra search seeds when
        connecting components.
    :param sample_size: number of objects processed by detour removal,
        ``ceil(n / K)`` by default.
    :param pivot_sample_size: number of pivots searched from per sampled object,
        ``K`` by default.
    :param cap: maximum number of detours linked per sampled object, ``K**2`` by
        default.
    :param search_hops: hop budget of the greedy search used to connect components.
    :param edge_factor: constant ``C`` of the size bound ``edges <= C * n * K``.
    :param skip_updates: skip the neighborhoods that cannot produce new candidates
        during NNDescent iterations.
    :param connect: link the connected components of the symmetrized lists.
    :param detours: add shortcut links where greedy paths make detours.
    :param seed: seed of every random choice made during construction.
    :param threads: number of worker threads.
    """

    K: int = 10
    K_prime: Optional[int] = None
    m: Optional[int] = None
    max_iters: int = 12
    repeats: int = 3
    capacity: Optional[int] = None
    v_piv_size: int = 5
    sample_size: Optional[int] = None
    pivot_sample_size: Optional[int] = None
    cap: Optional[int] = None
    search_hops: int = 10
    edge_factor: int = 8
    skip_updates: bool = True
    connect: bool = True
    detours: bool = True
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("K", "repeats", "threads", "edge_factor"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigurationError(f"`{name}` must be at least 1, got {value}")
        for name in ("max_iters", "v_piv_size", "search_hops"):
            value = getattr(self, name)
            if value < 0:
                raise ConfigurationError(f"`{name}` must be non-negative, got {value}")
        for name in ("K_prime", "m", "sample_size", "pivot_sample_size"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigurationError(f"`{name}` must be non-negative, got {value}")
        if self.capacity is not None and self.capacity < 2:
            raise ConfigurationError(
                f"`capacity` must be at least 2, got {self.capacity}"
            )
        if self.cap is not None and self.cap < 1:
            raise ConfigurationError(f"`cap` must be at least 1, got {self.cap}")
        if self.K_prime is not None and self.K_prime < self.K:
            raise ConfigurationError(
                f"`K_prime` ({self.K_prime}) must be at least `K` ({self.K})"
            )

    def resolve(self, n: int) -> "BuildParams":
        """
        Returns a copy with every optional field filled in for a dataset of ``n``
        objects. Raises :class:`ConfigurationError` if ``K >= n``.
        """
        if self.K >= n:
            raise ConfigurationError(
                f"`K` ({self.K}) must be smaller than the number of objects ({n})"
            )
        K_prime = 4 * self.K if self.K_prime is None else self.K_prime
        if self.K_prime is not None and self.K_prime > n - 1:
            warnings.warn(
                f"`K_prime` ({self.K_prime}) exceeds the number of other objects, "
                f"using {n - 1}",
                stacklevel=2,
            )
        m = max(math.ceil(n / 1000), 10) if self.m is None else self.m
        return replace(
            self,
            K_prime=min(K_prime, n - 1),
            m=min(m, n),
            capacity=2 * self.K if self.capacity is None else self.capacity,
            sample_size=(
                math.ceil(n / self.K) if self.sample_size is None else self.sample_size
            ),
            pivot_sample_size=(
                self.K if self.pivot_sample_size is None else self.pivot_sample_size
            ),
            cap=self.K**2 if self.cap is None else self.cap,
        )


@dataclass
class BuildStats:
    """Measurements collected while building a graph."""

    timings: dict[str, float] = field(default_factory=dict)
    iterations: int = 0
    distance_evals: int = 0
    connect_edges: int = 0
    detour_edges: int = 0
    removed_edges: int = 0

    @property
    def total_time(self) -> float:
        return math.fsum(self.timings.values())


class Mrpg:
    r"""
    Proximity graph used to filter outlier candidates.

    ``adjacency[p]`` lists the neighbors of ``p`` in ascending order. For the MRPG
    variants the graph is undirected (``q`` in ``adjacency[p]`` iff ``p`` in
    ``adjacency[q]``) and connected, unless built with ``connect=False``; for
    ``kgraph`` it is the directed approximate nearest-neighbor graph.

    :param adjacency: neighbor ids of every vertex.
    :param K: number of approximate nearest neighbors used to build the graph.
    :param K_prime: length of the exact nearest-neighbor lists.
    :param variant: one of ``mrpg``, ``mrpg-basic`` or ``kgraph``.
    :param is_pivot: pivot flag of every vertex, all ``False`` by default.
    :param exact_knn: exact nearest-neighbor lists of the flagged vertices.
    :param checksum: digest of the dataset the graph was built on.
    :param stats: construction measurements.
    """

    def __init__(
        self,
        adjacency: list[Iterable[int]],
        K: int,
        K_prime: int,
        variant: str = "mrpg",
        is_pivot: Optional[list[bool]] = None,
        exact_knn: Optional[dict[int, NeighborList]] = None,
        checksum: bytes = b"",
        stats: Optional[BuildStats] = None,
    ):
        if variant not in VARIANTS:
            raise ConfigurationError(
                f"graph variant '{variant}' is not supported. Choose from "
                f"{', '.join(VARIANTS)}"
            )
        self.adjacency = [sorted(neighbors) for neighbors in adjacency]
        n = len(self.adjacency)
        if is_pivot is None:
            is_pivot = [False] * n
        if len(is_pivot) != n:
            raise ValueError(
                f"`is_pivot` has {len(is_pivot)} entries for a graph with {n} vertices"
            )
        self.is_pivot = list(is_pivot)
        self.exact_knn = dict(exact_knn) if exact_knn is not None else {}
        self.K = K
        self.K_prime = K_prime
        self.variant = variant
        self.checksum = checksum
        self.stats = stats if stats is not None else BuildStats()

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return (
            f"Mrpg(variant={self.variant!r}, n={self.n}, K={self.K}, "
            f"edges={self.num_edges})"
        )

    @property
    def is_directed(self) -> bool:
        return self.variant == "kgraph"

    @property
    def pivots(self) -> list[int]:
        return [p for p, flag in enumerate(self.is_pivot) if flag]

    def has_exact_knn(self, p: int) -> bool:
        return p in self.exact_knn

    def exact_neighbor_count(self, p: int, r: float, k: int) -> Optional[int]:
        """
        Neighbor count of ``p`` within ``r`` (capped at ``k``) read from its exact
        list, or ``None`` when the list cannot decide it.

        The list decides whenever it holds at least ``k`` entries or contains every
        other object.
        """
        neighbors = self.exact_knn.get(p)
        if neighbors is None:
            return None
        if k > len(neighbors) and len(neighbors) < self.n - 1:
            return None
        return neighbors.count_within(r, k)

    @property
    def num_edges(self) -> int:
        """Number of edges, counting each undirected edge once."""
        total = sum(len(neighbors) for neighbors in self.adjacency)
        return total if self.is_directed else total // 2

    def degree_stats(self) -> dict[str, float]:
        degrees = [len(neighbors) for neighbors in self.adjacency]
        return {
            "min": min(degrees),
            "max": max(degrees),
            "mean": math.fsum(degrees) / len(degrees),
        }

    def nbytes(self) -> int:
        """Approximate memory footprint of the stored ids and distances."""
        ids = sum(len(neighbors) for neighbors in self.adjacency)
        exact = sum(len(neighbors) for neighbors in self.exact_knn.values())
        return 4 * ids + 12 * exact + self.n

    def is_symmetric(self) -> bool:
        for p, neighbors in enumerate(self.adjacency):
            for q in neighbors:
                if p not in self.adjacency[q]:
                    return False
        return True

    def num_components(self) -> int:
        """Number of connected components, ignoring edge directions."""
        return count_components(self.adjacency)


def count_components(adjacency: list[Iterable[int]]) -> int:
    """Number of connected components of a graph, ignoring edge directions."""
    n = len(adjacency)
    undirected = [set(neighbors) for neighbors in adjacency]
    for p, neighbors in enumerate(adjacency):
        for q in neighbors:
            undirected[q].add(p)

    seen = [False] * n
    components = 0
    for start in range(n):
        if seen[start]:
            continue
        components += 1
        seen[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in undirected[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    return components
