import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Optional

import torch

from ..data.dataset import Dataset
from ..lib.seeding import make_generator, random_index
from ..metrics import DistanceCounter
from ..oracle import monotone_reachability

#: Largest dataset accepted by :func:`build_msg_oracle`.
MSG_ORACLE_LIMIT = 2000


@dataclass(frozen=True, order=True)
class DetourPair:
    """
    A vertex ``target`` reached from ``source`` through a hop that moved away from
    ``source``, together with ``dist = dist(source, target)``.
    """

    dist: float
    target: int
    source: int


@dataclass
class Exploration:
    """Result of a hop-bounded breadth-first search around a source object."""

    detours: list[DetourPair]
    dists: dict[int, float]


def explore(
    adjacency: Sequence[Iterable[int]],
    dataset: Dataset,
    p: int,
    start: int,
    hop_limit: Optional[int],
    counter: Optional[DistanceCounter] = None,
) -> Exploration:
    r"""
    Breadth-first search from ``start`` collecting the vertices that are not reached
    monotonically with respect to ``p``.

    A vertex ``x`` discovered from ``parent`` is recorded when
    ``dist(p, parent) > dist(p, x)``. Without a hop limit the search covers the whole
    component of ``start`` and every vertex it cannot reach is recorded as well.
    ``p`` itself is never recorded.

    :return: the recorded pairs (unsorted) and the distance from ``p`` of every
        vertex the search evaluated.
    """
    dists: dict[int, float] = {start: dataset.distance(p, start, counter)}
    detours: list[DetourPair] = []
    frontier = [start]
    hops = 0
    while frontier and (hop_limit is None or hops < hop_limit):
        hops += 1
        discovered: list[int] = []
        parents: list[int] = []
        for u in frontier:
            for v in sorted(adjacency[u]):
                if v not in dists:
                    dists[v] = math.nan
                    discovered.append(v)
                    parents.append(u)
        if not discovered:
            break
        batch = dataset.distances(p, discovered, counter).tolist()
        for v, u, d in zip(discovered, parents, batch):
            dists[v] = d
            if v != p and dists[u] > d:
                detours.append(DetourPair(dist=d, target=v, source=p))
        frontier = discovered

    if hop_limit is None:
        unreached = [v for v in range(dataset.n) if v not in dists]
        if unreached:
            batch = dataset.distances(p, unreached, counter).tolist()
            for v, d in zip(unreached, batch):
                dists[v] = d
                if v != p:
                    detours.append(DetourPair(dist=d, target=v, source=p))
    return Exploration(detours=detours, dists=dists)


def get_non_monotonic(
    adjacency: Sequence[Iterable[int]],
    dataset: Dataset,
    p: int,
    start: int,
    hop_limit: Optional[int],
    cap: Optional[int] = None,
    counter: Optional[DistanceCounter] = None,
) -> list[DetourPair]:
    """
    Vertices reached non-monotonically from ``start`` with respect to ``p`` within
    ``hop_limit`` hops (``None`` for no limit), sorted by ascending distance from
    ``p`` then id and truncated to ``cap`` entries.

    >>> from torchdod.data import Dataset
    >>> ds = Dataset([0.0, 5.0, 2.0], metric="l1")
    >>> get_non_monotonic([[1], [0, 2], [1]], ds, p=0, start=0, hop_limit=2)
    [DetourPair(dist=2.0, target=2, source=0)]
    """
    detours = sorted(explore(adjacency, dataset, p, start, hop_limit, counter).detours)
    if cap is not None:
        del detours[cap:]
    return detours


def monotone_path_density(
    adjacency: Sequence[Iterable[int]],
    dataset: Dataset,
    pairs: int = 1000,
    seed: int = 0,
    radius: Optional[float] = None,
) -> float:
    """
    Fraction of sampled ordered pairs ``(p, q)`` joined by a monotonic path, see
    :func:`torchdod.oracle.monotone_reachability`.

    :param pairs: number of sources ``p`` to sample (with replacement).
    :param seed: seed of the sampling.
    :param radius: when given, ``q`` is drawn among the objects within ``radius`` of
        ``p`` and sources without such an object are skipped. Otherwise ``q`` is any
        other object.
    """
    n = dataset.n
    if n < 2 or pairs < 1:
        return 1.0
    generator = make_generator(seed)
    sources = torch.randint(0, n, (pairs,), generator=generator).tolist()

    hits = 0
    sampled = 0
    for p in sources:
        if radius is None:
            q = (p + random_index(generator, n - 1) + 1) % n
        else:
            dists = dataset.distances_block(p, 0, n)
            dists[p] = torch.inf
            close = torch.nonzero(dists <= radius).flatten().tolist()
            if not close:
                continue
            q = close[random_index(generator, len(close))]
        sampled += 1
        hits += monotone_reachability(adjacency, dataset, p, q)
    if sampled == 0:
        return 1.0
    return hits / sampled


def build_msg_oracle(
    dataset: Dataset, base: Sequence[Iterable[int]]
) -> list[set[int]]:
    r"""
    Turns ``base`` into a monotonic search graph by linking every vertex to all
    vertices it does not reach monotonically, using unbounded searches.

    For each ``p``, the unbounded non-monotonic vertices found from ``p`` are chained
    by distance and linked bidirectionally (``p`` to the closest, then each to the
    next), exactly as detour removal does. Every vertex is then reachable from ``p``
    along a path whose distance from ``p`` never decreases. Intended for small
    datasets.

    :raises ValueError: if ``dataset.n`` exceeds :data:`MSG_ORACLE_LIMIT`.
    """
    if dataset.n > MSG_ORACLE_LIMIT:
        raise ValueError(
            f"the monotonic search graph oracle is limited to {MSG_ORACLE_LIMIT} "
            f"objects, got {dataset.n}"
        )
    adjacency = [set(neighbors) for neighbors in base]
    for p in range(dataset.n):
        detours = get_non_monotonic(adjacency, dataset, p, p, None)
        chain_link(adjacency, p, [pair.target for pair in detours])
    return adjacency


def chain_link(adjacency: list[set[int]], p: int, chain: Sequence[int]) -> int:
    """
    Links ``p`` to ``chain[0]`` and each ``chain[j]`` to ``chain[j + 1]``, in both
    directions.

    :return: the number of new undirected edges.
    """
    added = 0
    previous = p
    for v in chain:
        if v != previous and v not in adjacency[previous]:
            adjacency[previous].add(v)
            adjacency[v].add(previous)
            added += 1
        previous = v
    return added

