import logging
from collections import deque
from typing import Optional

import torch

from ..data.dataset import Dataset
from ..errors import ConfigurationError
from ..graphs.graph import Mrpg
from ..lib import VisitMarker, VpTree
from ..metrics import DistanceCounter
from ..utils.intrinsic_dim import LOW_DIMENSION, estimate_intrinsic_dimension

logger = logging.getLogger(__name__)

VERIFY_MODES = ("vp_tree", "linear_scan", "auto")


def greedy_count(
    graph: Mrpg,
    dataset: Dataset,
    p: int,
    r: float,
    k: int,
    marker: Optional[VisitMarker] = None,
    counter: Optional[DistanceCounter] = None,
) -> tuple[int, int]:
    """
    Same as :func:`greedy_counting` but also returns the number of vertices whose
    distance to ``p`` was evaluated.
    """
    if marker is None:
        marker = VisitMarker(graph.n)
    marker.reset()
    marker.mark(p)

    adjacency = graph.adjacency
    is_pivot = graph.is_pivot
    queue = deque([p])
    count = 0
    visited = 0
    while queue:
        u = queue.popleft()
        fresh = [v for v in adjacency[u] if marker.check_and_mark(v)]
        if not fresh:
            continue
        # one batch per vertex, charged only up to the neighbor that reaches k
        dists = dataset.distances(p, fresh).tolist()
        for v, d in zip(fresh, dists):
            visited += 1
            if counter is not None:
                counter.add(1)
            if d <= r:
                count += 1
                if count == k:
                    return count, visited
                queue.append(v)
            elif is_pivot[v]:
                queue.append(v)
    return count, visited


def greedy_counting(
    graph: Mrpg,
    dataset: Dataset,
    p: int,
    r: float,
    k: int,
    marker: Optional[VisitMarker] = None,
    counter: Optional[DistanceCounter] = None,
) -> int:
    r"""
    Lower bound on the number of neighbors of ``p``, found by traversing the graph.

    The traversal starts at ``p`` and proceeds in FIFO order. Every unvisited neighbor
    of a dequeued vertex is marked visited; if it lies within ``r`` of ``p`` it is
    counted and enqueued, otherwise it is enqueued only if it is a pivot. The
    traversal ends when the count reaches ``k`` or the queue is empty. ``p`` is never
    counted.

    :param graph: proximity graph over ``dataset``.
    :param dataset: the objects.
    :param p: the object whose neighbors are counted.
    :param r: neighbor radius.
    :param k: count at which to stop.
    :param marker: visited set to reuse, a new one is allocated otherwise.
    :param counter: incremented with the distance evaluations.
    :return: the count, between 0 and ``k``.
    """
    return greedy_count(graph, dataset, p, r, k, marker, counter)[0]


def exact_counting(
    dataset: Dataset,
    tree: Optional[VpTree],
    p: int,
    r: float,
    k: int,
    mode: str = "linear_scan",
    counter: Optional[DistanceCounter] = None,
) -> int:
    """
    Exact number of neighbors of ``p`` capped at ``k``.

    :param dataset: the objects.
    :param tree: VP-tree over ``dataset``, required for ``vp_tree`` mode.
    :param p: the object whose neighbors are counted.
    :param r: neighbor radius.
    :param k: count at which to stop.
    :param mode: ``vp_tree`` for a range count on ``tree`` or ``linear_scan`` for a
        scan over the objects in blocks of ``dataset.metric.scan_chunk``.
    :param counter: incremented with the distance evaluations.
    """
    if mode == "vp_tree":
        if tree is None:
            raise ConfigurationError("`vp_tree` verification requires a VP-tree")
        return tree.range_count(p, r, k, counter)
    if mode != "linear_scan":
        raise ConfigurationError(
            f"verification mode '{mode}' is not supported. Choose from vp_tree, "
            "linear_scan"
        )

    n = dataset.n
    chunk = dataset.metric.scan_chunk
    count = 0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        within = dataset.distances_block(p, start, stop, counter) <= r
        if start <= p < stop:
            within[p - start] = False
        count += int(torch.count_nonzero(within))
        if count >= k:
            return k
    return count


def resolve_verify_mode(
    dataset: Dataset,
    mode: str,
    tree: Optional[VpTree] = None,
    seed: int = 0,
) -> tuple[str, Optional[VpTree]]:
    """
    Turns ``auto`` into a concrete verification mode.

    ``auto`` keeps a given tree. Without one, it estimates the intrinsic
    dimensionality of ``dataset`` and builds a VP-tree when the estimate is below
    :data:`torchdod.utils.LOW_DIMENSION`, using a linear scan otherwise. An explicit
    ``vp_tree`` mode without a tree raises :class:`ConfigurationError`.
    """
    if mode not in VERIFY_MODES:
        raise ConfigurationError(
            f"verification mode '{mode}' is not supported. Choose from "
            f"{', '.join(VERIFY_MODES)}"
        )
    if mode == "auto":
        if tree is not None:
            return "vp_tree", tree
        dimension = estimate_intrinsic_dimension(dataset, seed=seed)
        logger.debug("estimated intrinsic dimensionality %.2f", dimension)
        if dimension < LOW_DIMENSION:
            return "vp_tree", VpTree(dataset, seed=seed)
        return "linear_scan", None
    if mode == "vp_tree" and tree is None:
        raise ConfigurationError("`vp_tree` verification requires a VP-tree")
    return mode, tree
