import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import torch
from torch.profiler import record_function

from ..data.dataset import Dataset
from ..errors import ConfigurationError
from ..lib import NeighborList, map_chunks, partition_for_init
from ..lib.seeding import make_generator, spawn_seed
from ..metrics import DistanceCounter
from .graph import BuildParams

logger = logging.getLogger(__name__)


@dataclass
class AknnGraph:
    """
    Approximate K-nearest-neighbor lists of every object.

    :param lists: one :class:`torchdod.lib.NeighborList` per object.
    :param K: capacity of the lists.
    :param iterations: number of refinement iterations that were run.
    :param distance_evals: distance evaluations spent building the lists.
    """

    lists: list[NeighborList]
    K: int
    iterations: int = 0
    distance_evals: int = 0
    pivots: set[int] = field(default_factory=set)
    exact: set[int] = field(default_factory=set)

    @property
    def n(self) -> int:
        return len(self.lists)

    def neighbor_ids(self) -> list[list[int]]:
        return [list(neighbors.ids) for neighbors in self.lists]


def random_neighbors(
    dataset: Dataset,
    lists: list[NeighborList],
    targets: Sequence[int],
    generator: torch.Generator,
    counter: Optional[DistanceCounter] = None,
) -> None:
    """
    Fills the lists of ``targets`` with uniformly drawn distinct objects until each
    holds ``capacity`` entries.
    """
    n = dataset.n
    for p in targets:
        missing = lists[p].capacity - len(lists[p])
        if missing <= 0:
            continue
        present = set(lists[p].ids)
        present.add(p)
        chosen: list[int] = []
        draws = torch.randint(0, n, (2 * missing + 4,), generator=generator).tolist()
        for q in draws:
            if q not in present:
                present.add(q)
                chosen.append(q)
                if len(chosen) == missing:
                    break
        if len(chosen) < missing:
            for q in torch.randperm(n, generator=generator).tolist():
                if q not in present:
                    present.add(q)
                    chosen.append(q)
                    if len(chosen) == missing:
                        break
        lists[p].merge(chosen, dataset.distances(p, chosen, counter))


def exact_knn(
    dataset: Dataset,
    p: int,
    K_prime: int,
    counter: Optional[DistanceCounter] = None,
) -> NeighborList:
    """
    The exact ``K_prime`` nearest neighbors of ``p`` by a linear scan, ties broken by
    ascending id.
    """
    if not 0 < K_prime < dataset.n:
        raise ConfigurationError(
            f"`K_prime` must be between 1 and {dataset.n - 1}, got {K_prime}"
        )
    dists = dataset.distances_block(p, 0, dataset.n, counter)
    dists[p] = torch.inf
    dists, order = torch.sort(dists, stable=True)
    return NeighborList.from_candidates(
        p, K_prime, order[:K_prime], dists[:K_prime]
    )


def _similar_lists(forward: list[tuple[int, ...]]) -> list[frozenset[int]]:
    reverse: list[list[int]] = [[] for _ in forward]
    for p, ids in enumerate(forward):
        for q in ids:
            reverse[q].append(p)
    return [frozenset(ids).union(rev) for ids, rev in zip(forward, reverse)]


def descend(
    dataset: Dataset,
    lists: list[NeighborList],
    max_iters: int,
    skip_updates: bool = False,
    threads: int = 1,
    counter: Optional[DistanceCounter] = None,
) -> int:
    r"""
    Refines approximate nearest-neighbor lists in place until no list changes or
    ``max_iters`` iterations have run.

    Every iteration reads a snapshot of the lists taken at its start. The similar
    objects ``S(p)`` of ``p`` are its list entries and the objects listing ``p``; the
    candidates of ``p`` are every ``q`` in ``S(p)`` together with ``S(q)``.

    With ``skip_updates``, a ``q`` in ``S(p)`` is consulted only if ``S(q)`` changed
    during the previous iteration or ``q`` entered ``S(p)`` during it; any other ``q``
    would only offer candidates ``p`` has already been offered.

    :return: the number of iterations run.
    """
    n = len(lists)
    previous: Optional[list[frozenset[int]]] = None
    changed_similar: list[bool] = [True] * n
    iterations = 0

    for _ in range(max_iters):
        forward = [tuple(neighbors.ids) for neighbors in lists]
        similar = _similar_lists(forward)
        if previous is not None:
            changed_similar = [a != b for a, b in zip(similar, previous)]
        first = previous is None or not skip_updates
        old_similar = previous

        def refine(chunk: Sequence[int]) -> tuple[int, int]:
            local = DistanceCounter()
            updates = 0
            for p in chunk:
                if first:
                    consulted = similar[p]
                else:
                    seen = old_similar[p]
                    consulted = [
                        q for q in similar[p] if changed_similar[q] or q not in seen
                    ]
                candidates: set[int] = set()
                for q in consulted:
                    candidates.add(q)
                    candidates.update(similar[q])
                candidates.discard(p)
                candidates.difference_update(forward[p])
                if not candidates:
                    continue
                ids = sorted(candidates)
                if lists[p].merge(ids, dataset.distances(p, ids, local)):
                    updates += 1
            return updates, local.value

        iterations += 1
        with record_function("NNDescent: iteration"):
            results = map_chunks(refine, range(n), threads)
        updates = sum(u for u, _ in results)
        if counter is not None:
            counter.add(sum(c for _, c in results))
        logger.debug("iteration %d updated %d lists", iterations, updates)

        previous = similar
        if updates == 0:
            break
    return iterations


def nndescent(
    dataset: Dataset,
    K: int,
    max_iters: int = 12,
    seed: int = 0,
    threads: int = 1,
    skip_updates: bool = False,
) -> AknnGraph:
    """
    Approximate K-nearest-neighbor graph from random initial lists refined by
    :func:`descend`.

    :param dataset: the objects.
    :param K: number of neighbors per object, smaller than ``dataset.n``.
    :param max_iters: maximum number of refinement iterations.
    :param seed: seed of the random initialization.
    :param threads: number of worker threads.
    :param skip_updates: enable the skip rule of :func:`descend`.
    """
    if not 0 < K < dataset.n:
        raise ConfigurationError(
            f"`K` ({K}) must be positive and smaller than the number of objects "
            f"({dataset.n})"
        )
    counter = DistanceCounter()
    lists = [NeighborList(p, K) for p in range(dataset.n)]
    with record_function("NNDescent: random init"):
        random_neighbors(
            dataset, lists, range(dataset.n), make_generator(seed), counter
        )
    iterations = descend(dataset, lists, max_iters, skip_updates, threads, counter)
    return AknnGraph(
        lists=lists, K=K, iterations=iterations, distance_evals=counter.value
    )


def nndescent_plus(dataset: Dataset, params: BuildParams) -> AknnGraph:
    r"""
    NNDescent with three refinements.

    1. Initial lists come from the groups of a VP-tree partition: each object is
       paired with its nearest group mates over ``params.repeats`` trees. The vantages
       whose left child is a leaf become pivots. Objects still short of ``K`` entries
       are topped up at random.
    2. Iterations apply the skip rule of :func:`descend` when
       ``params.skip_updates`` is set.
    3. The ``m`` objects with the largest mean neighbor distance get their exact
       ``K_prime`` nearest neighbors and are flagged as exact.

    :return: the lists together with the pivot and exact-flag sets.
    """
    params = params.resolve(dataset.n)
    counter = DistanceCounter()
    generator = make_generator(params.seed)
    partition_seed = spawn_seed(generator)
    fill_seed = spawn_seed(generator)

    K = params.K
    lists = [NeighborList(p, K) for p in range(dataset.n)]
    with record_function("NNDescent+: partition"):
        partition, uncovered = partition_for_init(
            dataset, params.capacity, params.repeats, partition_seed, counter
        )
        for group in partition.groups:
            for p in group:
                lists[p].merge(group, dataset.distances(p, group, counter))
        logger.debug(
            "%d groups, %d pivots, %d uncovered objects",
            len(partition.groups),
            len(partition.pivots),
            len(uncovered),
        )
        random_neighbors(
            dataset, lists, range(dataset.n), make_generator(fill_seed), counter
        )

    iterations = descend(
        dataset, lists, params.max_iters, params.skip_updates, params.threads, counter
    )

    with record_function("NNDescent+: exact lists"):
        scores = [neighbors.mean_distance() for neighbors in lists]
        ranked = sorted(range(dataset.n), key=lambda p: (-scores[p], p))
        exact = ranked[: params.m]
        for p in exact:
            lists[p] = exact_knn(dataset, p, params.K_prime, counter)

    return AknnGraph(
        lists=lists,
        K=K,
        iterations=iterations,
        distance_evals=counter.value,
        pivots=set(partition.pivots),
        exact=set(exact),
    )
