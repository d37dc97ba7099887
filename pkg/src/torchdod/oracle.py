"""
Brute-force reference implementations.

Nothing in this module shares code with the counting paths of
:mod:`torchdod.detectors`; every pair of objects is compared directly.
"""

import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .data.dataset import Dataset


@dataclass
class OracleReport:
    """
    Exact answer of a distance-based outlier query.

    :param outliers: ids of the objects with fewer than ``k`` neighbors.
    :param neighbor_counts: uncapped number of neighbors of every object.
    :param runtime: wall time of the scan in seconds.
    """

    outliers: set[int] = field(default_factory=set)
    neighbor_counts: list[int] = field(default_factory=list)
    runtime: float = 0.0


def brute_force_outliers(dataset: Dataset, r: float, k: int) -> OracleReport:
    """
    Counts the neighbors of every object by comparing all pairs.

    An object ``q != p`` is a neighbor of ``p`` when ``dist(p, q) <= r``; ``p`` is an
    outlier when it has fewer than ``k`` neighbors.

    >>> from torchdod.data import Dataset
    >>> report = brute_force_outliers(Dataset([0, 1, 2, 10], metric="l1"), r=1.5, k=1)
    >>> report.outliers, report.neighbor_counts
    ({3}, [1, 2, 1, 0])
    """
    tick = time.perf_counter()
    n = dataset.n
    counts = [0] * n
    for p in range(n):
        for q in range(p + 1, n):
            if dataset.distance(p, q) <= r:
                counts[p] += 1
                counts[q] += 1
    return OracleReport(
        outliers={p for p in range(n) if counts[p] < k},
        neighbor_counts=counts,
        runtime=time.perf_counter() - tick,
    )


def exact_neighbors(dataset: Dataset, p: int, K: int) -> list[int]:
    """Ids of the ``K`` nearest neighbors of ``p``, ties broken by ascending id."""
    dists = [(dataset.distance(p, q), q) for q in range(dataset.n) if q != p]
    return [q for _, q in sorted(dists)[:K]]


def monotone_reachability(
    adjacency: Sequence[Iterable[int]], dataset: Dataset, p: int, q: int
) -> bool:
    """
    Whether ``adjacency`` holds a path from ``p`` to ``q`` along which the distance
    from ``p`` never decreases.

    >>> from torchdod.data import Dataset
    >>> ds = Dataset([0.0, 5.0, 2.0], metric="l1")
    >>> monotone_reachability([[1], [0, 2], [1]], ds, 0, 2)
    False
    >>> monotone_reachability([[1, 2], [0, 2], [0, 1]], ds, 0, 2)
    True
    """
    if p == q:
        return True
    dists = dataset.distances_block(p, 0, dataset.n).tolist()
    dists[p] = 0.0
    reached = {p}
    stack = [p]
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if v not in reached and dists[v] >= dists[u]:
                if v == q:
                    return True
                reached.add(v)
                stack.append(v)
    return False
