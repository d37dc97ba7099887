import logging
import time
import warnings
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import replace
from typing import Optional

import torch
from torch.profiler import record_function

from ..data.dataset import Dataset
from ..errors import ConfigurationError
from ..lib import map_chunks
from ..lib.seeding import (
    make_generator,
    random_choice,
    random_sample,
    spawn_seed,
    spawn_seeds,
)
from ..metrics import DistanceCounter
from .graph import VARIANTS, BuildParams, BuildStats, Mrpg
from .monotonic import chain_link, explore
from .nndescent import AknnGraph, nndescent, nndescent_plus

logger = logging.getLogger(__name__)

#: Sampling weight of pivots when choosing the objects processed by detour removal.
PIVOT_WEIGHT = 4.0


def symmetrize(aknn: AknnGraph) -> list[set[int]]:
    """
    Undirected adjacency holding an edge ``{p, q}`` whenever ``q`` is in the list of
    ``p`` or ``p`` in the list of ``q``. Exact lists are used as they are.
    """
    adjacency = [set(neighbors.ids) for neighbors in aknn.lists]
    for p, neighbors in enumerate(aknn.lists):
        for q in neighbors.ids:
            adjacency[q].add(p)
    return adjacency


def _component(adjacency: Sequence[Iterable[int]], start: int, seen: list[bool]):
    seen[start] = True
    members = [start]
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                members.append(v)
                queue.append(v)
    return members


def ann_search(
    adjacency: Sequence[Iterable[int]],
    dataset: Dataset,
    query: int,
    seeds: Sequence[int],
    max_hops: int = 10,
    counter: Optional[DistanceCounter] = None,
) -> int:
    """
    Greedy graph search for an object close to ``query``.

    From every seed, repeatedly moves to the neighbor closest to ``query`` while it
    improves on the current vertex, for at most ``max_hops`` moves. ``query`` itself
    is never returned.

    :return: the closest vertex seen, ties broken by smaller id.
    """
    best: Optional[tuple[float, int]] = None
    for seed in seeds:
        if seed == query:
            continue
        current = (dataset.distance(query, seed, counter), seed)
        if best is None or current < best:
            best = current
        for _ in range(max_hops):
            neighbors = [v for v in adjacency[current[1]] if v != query]
            if not neighbors:
                break
            dists = dataset.distances(query, neighbors, counter).tolist()
            step = min(zip(dists, neighbors))
            if step >= current:
                break
            current = step
            if current < best:
                best = current
    if best is None:
        raise ValueError("`seeds` must contain an object other than the query")
    return best[1]


def connect_subgraphs(
    adjacency: list[set[int]],
    dataset: Dataset,
    pivots: set[int],
    v_piv_size: int = 5,
    seed: int = 0,
    max_hops: int = 10,
    counter: Optional[DistanceCounter] = None,
) -> int:
    r"""
    Links the connected components of ``adjacency`` into a single one.

    Components are discovered by BFS from random unvisited objects. For every new
    component a random pivot (or a random member when it has none) is used as query
    of :func:`ann_search`, seeded with ``v_piv_size`` random pivots of the already
    visited part (random visited objects when there are no such pivots), and a
    bidirectional edge joins the query and the object found.

    :return: the number of edges added.
    """
    n = len(adjacency)
    generator = make_generator(seed)
    order = torch.randperm(n, generator=generator).tolist()
    seen = [False] * n

    visited = _component(adjacency, order[0], seen)
    visited_pivots = [v for v in visited if v in pivots]
    added = 0
    for start in order:
        if seen[start]:
            continue
        component = _component(adjacency, start, seen)
        component_pivots = [v for v in component if v in pivots]
        query = random_choice(generator, component_pivots or component)

        pool = visited_pivots if visited_pivots else visited
        seeds = random_sample(generator, pool, max(v_piv_size, 1))
        target = ann_search(adjacency, dataset, query, seeds, max_hops, counter)

        adjacency[query].add(target)
        adjacency[target].add(query)
        added += 1

        visited.extend(component)
        visited_pivots.extend(component_pivots)
    logger.debug("joined %d components", added + 1)
    return added


def _pivot_seeds(
    exploration_dists: dict[int, float],
    p: int,
    adjacency: Sequence[Iterable[int]],
    pivots: Sequence[int],
    is_pivot: Sequence[bool],
    exact: set[int],
    count: int,
    generator: torch.Generator,
) -> list[int]:
    excluded = set(adjacency[p])
    excluded.add(p)
    excluded.update(exact)
    close = sorted(
        (d, v)
        for v, d in exploration_dists.items()
        if is_pivot[v] and v not in excluded
    )
    chosen = [v for _, v in close[:count]]
    if len(chosen) < count:
        excluded.update(chosen)
        remaining = [v for v in pivots if v not in excluded]
        chosen.extend(random_sample(generator, remaining, count - len(chosen)))
    return chosen


def remove_detours(
    adjacency: list[set[int]],
    dataset: Dataset,
    is_pivot: Sequence[bool],
    exact: set[int],
    sample_size: int,
    pivot_sample_size: int,
    cap: int,
    seed: int = 0,
    threads: int = 1,
    targets: Optional[Sequence[int]] = None,
    counter: Optional[DistanceCounter] = None,
) -> int:
    r"""
    Adds links that shorten non-monotonic paths around a sample of objects.

    ``sample_size`` objects are drawn without replacement, pivots with weight
    :data:`PIVOT_WEIGHT` and other objects with weight 1; objects with exact lists
    are never drawn. For each sampled ``p``:

    - the non-monotonic vertices within 3 hops of ``p`` are collected,
    - so are those within 2 hops of ``pivot_sample_size`` pivots close to ``p``
      (pivots found by the first search ranked by distance, completed with random
      pivots; neighbors of ``p`` and objects with exact lists are skipped),
    - the union is sorted by distance from ``p`` and truncated to ``cap``, and ``p``
      is linked to the first entry and every entry to the next one.

    Every search reads the graph as it was on entry; the links are added once all
    searches are done, in sample order.

    :param targets: process these objects instead of drawing a sample.
    :return: the number of edges added.
    """
    n = len(adjacency)
    generator = make_generator(seed)
    if targets is None:
        weights = torch.tensor(
            [PIVOT_WEIGHT if flag else 1.0 for flag in is_pivot], dtype=torch.float64
        )
        if exact:
            weights[torch.tensor(sorted(exact))] = 0.0
        size = min(sample_size, int(torch.count_nonzero(weights)))
        if size == 0:
            return 0
        targets = torch.multinomial(
            weights, size, replacement=False, generator=generator
        ).tolist()
    targets = list(targets)
    seeds = spawn_seeds(generator, len(targets))
    pivots = [v for v in range(n) if is_pivot[v]]
    jobs = list(zip(targets, seeds))

    def collect(chunk: Sequence[tuple[int, int]]) -> tuple[list[list[int]], int]:
        local = DistanceCounter()
        chains = []
        for p, job_seed in chunk:
            found = explore(adjacency, dataset, p, p, 3, local)
            detours = {pair.target: pair.dist for pair in found.detours}
            starts = _pivot_seeds(
                found.dists,
                p,
                adjacency,
                pivots,
                is_pivot,
                exact,
                pivot_sample_size,
                make_generator(job_seed),
            )
            for start in starts:
                for pair in explore(adjacency, dataset, p, start, 2, local).detours:
                    detours[pair.target] = pair.dist
            ordered = sorted((d, v) for v, d in detours.items())[:cap]
            chains.append([v for _, v in ordered])
        return chains, local.value

    with record_function("Remove-Detours: search"):
        results = map_chunks(collect, jobs, threads)

    added = 0
    for (p, _), chain in zip(jobs, (c for chains, _ in results for c in chains)):
        added += chain_link(adjacency, p, chain)
    if counter is not None:
        counter.add(sum(evals for _, evals in results))
    return added


def remove_links(
    adjacency: list[set[int]], is_pivot: Sequence[bool], threads: int = 1
) -> int:
    r"""
    Drops the edges a non-pivot object shares with a neighboring pivot.

    For every non-pivot ``p`` linked to a pivot ``p'``, the edge ``(p, x)`` is removed
    for every non-pivot ``x`` adjacent to both. ``p`` keeps the link to its
    lowest-numbered pivot neighbor, its anchor, and the edge to a pivot ``x`` is
    removed when ``x`` is adjacent to the anchor. Edges between two pivots and
    anchor links are never removed, so each removed edge is replaced by a path
    through pivots: the graph stays connected and a traversal that follows pivots
    reaches the same objects. Decisions are taken on the graph as it was on entry
    and applied afterwards.

    :return: the number of edges removed.
    """
    candidates = [p for p in range(len(adjacency)) if not is_pivot[p]]

    def decide(chunk: Sequence[int]) -> list[tuple[int, int]]:
        removals = []
        for p in chunk:
            neighbors = adjacency[p]
            pivots = sorted(q for q in neighbors if is_pivot[q])
            if not pivots:
                continue
            anchor = pivots[0]
            doomed = {x for x in adjacency[anchor] & neighbors if is_pivot[x]}
            for pivot in pivots:
                for x in neighbors & adjacency[pivot]:
                    if x != p and not is_pivot[x]:
                        doomed.add(x)
            removals.extend((p, x) for x in sorted(doomed))
        return removals

    with record_function("Remove-Links: decide"):
        results = map_chunks(decide, candidates, threads)

    removed = 0
    for removals in results:
        for p, x in removals:
            if x in adjacency[p]:
                adjacency[p].discard(x)
                adjacency[x].discard(p)
                removed += 1
    return removed


def build_mrpg(
    dataset: Dataset, params: Optional[BuildParams] = None, variant: str = "mrpg"
) -> Mrpg:
    r"""
    Builds a proximity graph over ``dataset``.

    ``mrpg`` runs NNDescent+, symmetrizes the lists, connects the components, removes
    detours and removes redundant links. ``mrpg-basic`` does the same with exact lists
    of length ``K`` instead of ``K_prime``. ``kgraph`` is the directed graph of plain
    NNDescent lists, without pivots or exact lists.

    Pass timings are stored in :attr:`Mrpg.stats` under the keys ``NNDescent`` (or
    ``NNDescent+``), ``Connect-SubGraphs``, ``Remove-Detours`` and ``Remove-Links``.
    With ``params.connect`` or ``params.detours`` turned off the corresponding pass is
    skipped and has no timing entry.

    :param dataset: the objects.
    :param params: construction parameters, defaults when omitted.
    :param variant: one of ``mrpg``, ``mrpg-basic`` and ``kgraph``.

    >>> from torchdod.data import Dataset
    >>> ds = Dataset([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [5.0, 5.0]], metric="l2")
    >>> graph = build_mrpg(ds, BuildParams(K=2))
    >>> graph.num_components()
    1
    """
    if variant not in VARIANTS:
        raise ConfigurationError(
            f"graph variant '{variant}' is not supported. Choose from "
            f"{', '.join(VARIANTS)}"
        )
    if params is None:
        params = BuildParams()
    if variant == "mrpg-basic":
        if params.K_prime not in (None, params.K):
            raise ConfigurationError(
                f"graph variant 'mrpg-basic' uses K' = K = {params.K}, got "
                f"K' = {params.K_prime}"
            )
        params = replace(params, K_prime=params.K)
    params = params.resolve(dataset.n)

    stats = BuildStats()
    counter = DistanceCounter()

    if variant == "kgraph":
        tick = time.perf_counter()
        with record_function("kgraph: NNDescent"):
            aknn = nndescent(
                dataset,
                params.K,
                params.max_iters,
                params.seed,
                params.threads,
                skip_updates=False,
            )
        stats.timings["NNDescent"] = time.perf_counter() - tick
        stats.iterations = aknn.iterations
        stats.distance_evals = aknn.distance_evals
        return Mrpg(
            aknn.neighbor_ids(),
            K=params.K,
            K_prime=params.K,
            variant=variant,
            checksum=dataset.checksum(),
            stats=stats,
        )

    generator = make_generator(params.seed)
    descent_seed = spawn_seed(generator)
    connect_seed = spawn_seed(generator)
    detour_seed = spawn_seed(generator)

    tick = time.perf_counter()
    with record_function("MRPG: NNDescent+"):
        aknn = nndescent_plus(dataset, replace(params, seed=descent_seed))
    stats.timings["NNDescent+"] = time.perf_counter() - tick
    stats.iterations = aknn.iterations
    counter.add(aknn.distance_evals)

    is_pivot = [p in aknn.pivots for p in range(dataset.n)]
    exact_knn = {p: aknn.lists[p] for p in sorted(aknn.exact)}

    adjacency = symmetrize(aknn)
    if params.connect:
        tick = time.perf_counter()
        with record_function("MRPG: Connect-SubGraphs"):
            stats.connect_edges = connect_subgraphs(
                adjacency,
                dataset,
                aknn.pivots,
                params.v_piv_size,
                connect_seed,
                params.search_hops,
                counter,
            )
        stats.timings["Connect-SubGraphs"] = time.perf_counter() - tick

    if params.detours:
        tick = time.perf_counter()
        with record_function("MRPG: Remove-Detours"):
            stats.detour_edges = remove_detours(
                adjacency,
                dataset,
                is_pivot,
                aknn.exact,
                params.sample_size,
                params.pivot_sample_size,
                params.cap,
                detour_seed,
                params.threads,
                counter=counter,
            )
        stats.timings["Remove-Detours"] = time.perf_counter() - tick

    tick = time.perf_counter()
    with record_function("MRPG: Remove-Links"):
        stats.removed_edges = remove_links(adjacency, is_pivot, params.threads)
    stats.timings["Remove-Links"] = time.perf_counter() - tick
    stats.distance_evals = counter.value

    graph = Mrpg(
        adjacency,
        K=params.K,
        K_prime=params.K_prime,
        variant=variant,
        is_pivot=is_pivot,
        exact_knn=exact_knn,
        checksum=dataset.checksum(),
        stats=stats,
    )
    bound = params.edge_factor * dataset.n * params.K
    if graph.num_edges > bound:
        warnings.warn(
            f"graph has {graph.num_edges} edges, more than the expected bound of "
            f"{bound}; consider a smaller `K_prime` or `cap`",
            stacklevel=2,
        )
    logger.info(
        "built %s graph: %d vertices, %d edges, %d pivots",
        variant,
        graph.n,
        graph.num_edges,
        len(aknn.pivots),
    )
    return graph
