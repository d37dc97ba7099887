import sys
from dataclasses import replace
from pathlib import Path

import pytest
import torch

from torchdod.data import Dataset
from torchdod.detectors import DodParams, detect, greedy_counting
from torchdod.errors import ConfigurationError
from torchdod.graphs import (
    AknnGraph,
    BuildParams,
    Mrpg,
    ann_search,
    build_mrpg,
    connect_subgraphs,
    count_components,
    nndescent,
    remove_detours,
    remove_links,
    symmetrize,
)
from torchdod.lib import NeighborList
from torchdod.metrics import DistanceCounter

sys.path.append(str(Path(__file__).parents[1]))
from helpers import (
    chain_dataset,
    kth_neighbor_distances,
    radius_for_ratio,
    random_dataset,
)


def line_dataset(n):
    return Dataset([float(i) for i in range(n)], metric="l1")


def path_adjacency(n):
    return [{v for v in (u - 1, u + 1) if 0 <= v < n} for u in range(n)]


def test_symmetrize():
    lists = [
        NeighborList.from_candidates(0, 1, [1], [1.0]),
        NeighborList.from_candidates(1, 1, [0], [1.0]),
        NeighborList.from_candidates(2, 1, [1], [1.0]),
    ]
    adjacency = symmetrize(AknnGraph(lists=lists, K=1))
    assert adjacency == [{1}, {0, 2}, {1}]


def test_symmetrize_random_lists_give_symmetric_adjacency():
    ds = random_dataset("l2", n=200, seed=8)
    aknn = nndescent(ds, K=7, seed=8)
    adjacency = symmetrize(aknn)

    matrix = torch.zeros(ds.n, ds.n, dtype=torch.bool)
    for p, neighbors in enumerate(adjacency):
        matrix[p, list(neighbors)] = True
    assert torch.equal(matrix, matrix.T)
    assert not matrix.diagonal().any()
    for p, neighbors in enumerate(aknn.neighbor_ids()):
        assert set(neighbors) <= adjacency[p]
    # no edge without a list entry in one direction
    listed = torch.zeros_like(matrix)
    for p, neighbors in enumerate(aknn.neighbor_ids()):
        listed[p, neighbors] = True
    assert torch.equal(matrix, listed | listed.T)


def test_ann_search_walks_to_query():
    ds = line_dataset(10)
    adjacency = path_adjacency(10)
    assert ann_search(adjacency, ds, 9, seeds=[0], max_hops=20) == 8
    assert ann_search(adjacency, ds, 9, seeds=[0], max_hops=3) == 3
    # the best seed wins when it is already closer
    assert ann_search(adjacency, ds, 9, seeds=[0, 7], max_hops=0) == 7


def test_ann_search_counts_distances():
    ds = line_dataset(10)
    counter = DistanceCounter()
    ann_search(path_adjacency(10), ds, 9, seeds=[6], max_hops=20, counter=counter)
    # seed, then the neighbors of 6 and 7 (query excluded at 8)
    assert counter.value == 1 + 2 + 2 + 1


def test_ann_search_needs_other_seed():
    ds = line_dataset(3)
    with pytest.raises(ValueError, match="must contain an object other than the query"):
        ann_search(path_adjacency(3), ds, 1, seeds=[1])


def test_connect_two_cliques():
    ds = Dataset([0.0, 1.0, 2.0, 100.0, 101.0, 102.0], metric="l1")
    adjacency = [{1, 2}, {0, 2}, {0, 1}, {4, 5}, {3, 5}, {3, 4}]
    added = connect_subgraphs(adjacency, ds, pivots=set(), seed=3)
    assert added == 1
    assert count_components(adjacency) == 1
    assert sum(len(neighbors) for neighbors in adjacency) == 2 * 7
    # the bridge ends on the visited object closest to the query
    bridge = [(p, q) for p in range(3) for q in adjacency[p] if q >= 3]
    assert len(bridge) == 1
    p, q = bridge[0]
    assert p == 2 or q == 3


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_connect_many_components(seed):
    ds = random_dataset("l2", n=60)
    adjacency = [set() for _ in range(ds.n)]
    added = connect_subgraphs(adjacency, ds, pivots={0, 10, 20}, seed=seed)
    assert added == ds.n - 1
    assert count_components(adjacency) == 1


def test_connect_connected_graph_unchanged():
    ds = line_dataset(5)
    adjacency = path_adjacency(5)
    assert connect_subgraphs(adjacency, ds, pivots={2}) == 0
    assert adjacency == path_adjacency(5)


def test_remove_detours_on_chain():
    ds, adjacency = chain_dataset()
    added = remove_detours(
        adjacency,
        ds,
        is_pivot=[False, False, False],
        exact=set(),
        sample_size=1,
        pivot_sample_size=0,
        cap=10,
        targets=[0],
    )
    assert added == 1
    assert adjacency == [{1, 2}, {0, 2}, {1, 0}]


def test_remove_detours_complete_graph():
    ds = random_dataset("l2", n=15)
    complete = [set(range(ds.n)) - {p} for p in range(ds.n)]
    is_pivot = [p % 3 == 0 for p in range(ds.n)]
    added = remove_detours(
        complete, ds, is_pivot, set(), sample_size=5, pivot_sample_size=2, cap=4
    )
    assert added == 0


def test_remove_detours_bound():
    ds = random_dataset("l2", n=200)
    adjacency = symmetrize(nndescent(ds, K=4, seed=0))
    is_pivot = [p % 7 == 0 for p in range(ds.n)]
    edges = sum(len(neighbors) for neighbors in adjacency) // 2
    added = remove_detours(
        adjacency, ds, is_pivot, set(), sample_size=20, pivot_sample_size=3, cap=5
    )
    assert 0 <= added <= 20 * 5
    assert sum(len(neighbors) for neighbors in adjacency) // 2 == edges + added
    assert all(p not in adjacency[p] for p in range(ds.n))


def test_remove_detours_skips_exact_objects():
    ds, adjacency = chain_dataset()
    added = remove_detours(
        adjacency,
        ds,
        is_pivot=[False, False, False],
        exact={0, 1, 2},
        sample_size=3,
        pivot_sample_size=0,
        cap=10,
    )
    assert added == 0


@pytest.mark.parametrize("threads", [2, 3])
def test_remove_detours_thread_invariant(threads):
    ds = random_dataset("l2", n=150)
    base = symmetrize(nndescent(ds, K=4, seed=0))
    is_pivot = [p % 5 == 0 for p in range(ds.n)]

    results = []
    for n_threads in (1, threads):
        adjacency = [set(neighbors) for neighbors in base]
        remove_detours(
            adjacency, ds, is_pivot, {3}, 30, 3, 6, seed=4, threads=n_threads
        )
        results.append(adjacency)
    assert results[0] == results[1]


def test_remove_links_triangle():
    adjacency = [{1, 2}, {0, 2}, {0, 1}]
    removed = remove_links(adjacency, is_pivot=[False, True, False])
    assert removed == 1
    assert adjacency == [{1}, {0, 2}, {1}]


def test_remove_links_without_pivots():
    adjacency = [{1, 2}, {0, 2}, {0, 1}]
    assert remove_links(adjacency, is_pivot=[False] * 3) == 0
    assert adjacency == [{1, 2}, {0, 2}, {0, 1}]


def test_remove_links_pivot_triangle():
    adjacency = [{1, 2}, {0, 2}, {0, 1}]
    removed = remove_links(adjacency, is_pivot=[False, True, True])
    assert removed == 1
    # 1 is the anchor of 0 and still leads to 2
    assert adjacency == [{1}, {0, 2}, {1}]


def test_remove_links_keeps_anchor_and_pivot_edges():
    ds = random_dataset("l2", n=120)
    adjacency = symmetrize(nndescent(ds, K=6, seed=0))
    connect_subgraphs(adjacency, ds, pivots=set())
    is_pivot = [p % 4 == 0 for p in range(ds.n)]
    before = [set(neighbors) for neighbors in adjacency]

    remove_links(adjacency, is_pivot, threads=2)
    assert count_components(adjacency) == 1
    for p in range(ds.n):
        assert adjacency[p] <= before[p]
        pivots = sorted(q for q in before[p] if is_pivot[q])
        if not is_pivot[p] and pivots:
            assert pivots[0] in adjacency[p]
        if is_pivot[p]:
            assert {q for q in before[p] if is_pivot[q]} <= adjacency[p]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_remove_links_keeps_greedy_counts(seed):
    ds = random_dataset("l2", n=150, seed=seed)
    adjacency = symmetrize(nndescent(ds, K=6, seed=seed))
    connect_subgraphs(adjacency, ds, pivots=set(), seed=seed)
    is_pivot = [p % 5 == 0 for p in range(ds.n)]
    before = Mrpg([sorted(v) for v in adjacency], 6, 6, is_pivot=is_pivot)
    assert remove_links(adjacency, is_pivot) > 0
    after = Mrpg([sorted(v) for v in adjacency], 6, 6, is_pivot=is_pivot)

    kth = kth_neighbor_distances(ds, 5)
    levels = torch.tensor([0.1, 0.5, 0.9], dtype=kth.dtype)
    for r in torch.quantile(kth, levels).tolist():
        for p in range(ds.n):
            assert greedy_counting(after, ds, p, r, k=ds.n) == greedy_counting(
                before, ds, p, r, k=ds.n
            )


def test_build_tiny_dataset_is_complete():
    ds = random_dataset("l2", n=6)
    graph = build_mrpg(ds, BuildParams(K=5))
    assert graph.adjacency == [[q for q in range(6) if q != p] for p in range(6)]
    assert len(graph.exact_knn) == 6


def test_build_two_objects():
    ds = Dataset([0.0, 3.0], metric="l1")
    graph = build_mrpg(ds, BuildParams(K=1))
    assert graph.adjacency == [[1], [0]]
    assert graph.K_prime == 1


def test_build_mrpg_structure():
    ds = random_dataset("l2", n=400)
    graph = build_mrpg(ds, BuildParams(K=6))

    assert graph.n == ds.n
    assert graph.variant == "mrpg"
    assert graph.is_symmetric()
    assert graph.num_components() == 1
    assert all(p not in graph.adjacency[p] for p in range(ds.n))
    assert graph.num_edges <= 8 * ds.n * 6
    assert graph.pivots

    assert len(graph.exact_knn) == 10
    for p, neighbors in graph.exact_knn.items():
        assert neighbors.dists == sorted(neighbors.dists)
        assert len(neighbors) == 24
        assert p not in neighbors
    assert graph.checksum == ds.checksum()

    stats = graph.stats
    assert list(stats.timings) == [
        "NNDescent+",
        "Connect-SubGraphs",
        "Remove-Detours",
        "Remove-Links",
    ]
    assert stats.iterations >= 1
    assert stats.distance_evals > 0
    assert stats.total_time >= 0.0


def test_build_is_deterministic():
    ds = random_dataset("l1", n=200)
    first = build_mrpg(ds, BuildParams(K=5, seed=7))
    second = build_mrpg(ds, BuildParams(K=5, seed=7))
    assert first.adjacency == second.adjacency
    assert first.is_pivot == second.is_pivot
    assert first.exact_knn == second.exact_knn


def test_build_thread_invariant():
    ds = random_dataset("l2", n=200)
    serial = build_mrpg(ds, BuildParams(K=5, seed=2))
    threaded = build_mrpg(ds, BuildParams(K=5, seed=2, threads=3))
    assert serial.adjacency == threaded.adjacency
    assert serial.exact_knn == threaded.exact_knn


def test_build_kgraph():
    ds = random_dataset("l2", n=150)
    graph = build_mrpg(ds, BuildParams(K=5), variant="kgraph")
    assert graph.is_directed
    assert graph.pivots == []
    assert graph.exact_knn == {}
    assert all(len(neighbors) == 5 for neighbors in graph.adjacency)
    assert list(graph.stats.timings) == ["NNDescent"]


def test_build_basic_shares_pivots_and_exact_objects():
    ds = random_dataset("l2", n=200)
    full = build_mrpg(ds, BuildParams(K=5, seed=1))
    basic = build_mrpg(ds, BuildParams(K=5, seed=1), variant="mrpg-basic")
    assert basic.variant == "mrpg-basic"
    assert basic.K_prime == 5
    assert basic.pivots == full.pivots
    assert set(basic.exact_knn) == set(full.exact_knn)
    assert all(len(neighbors) == 5 for neighbors in basic.exact_knn.values())


def test_build_basic_rejects_K_prime():
    ds = random_dataset("l2", n=50)
    match = "graph variant 'mrpg-basic' uses K' = K = 5, got K' = 20"
    with pytest.raises(ConfigurationError, match=match):
        build_mrpg(ds, BuildParams(K=5, K_prime=20), variant="mrpg-basic")


@pytest.mark.parametrize(
    "switches", [{"detours": False}, {"connect": False, "detours": False}]
)
def test_build_without_passes_filters_less(switches):
    ds = random_dataset("l2", n=400, seed=3)
    params = BuildParams(K=6, seed=3)
    full = build_mrpg(ds, params)
    reduced = build_mrpg(ds, replace(params, **switches))

    assert reduced.pivots == full.pivots
    assert reduced.stats.detour_edges == 0
    assert "Remove-Detours" not in reduced.stats.timings
    assert full.stats.detour_edges > 0
    if not switches.get("connect", True):
        assert reduced.stats.connect_edges == 0
        assert "Connect-SubGraphs" not in reduced.stats.timings

    for k, ratio in ((3, 0.02), (8, 0.05)):
        query = DodParams(r=radius_for_ratio(ds, k, ratio), k=k)
        expected = detect(ds, full, None, query)
        result = detect(ds, reduced, None, query)
        assert result.outliers == expected.outliers
        # the full graph only adds edges, so it never counts fewer neighbors
        assert set(expected.candidates) <= set(result.candidates)
        assert result.f >= expected.f


def test_build_without_connect():
    ds = random_dataset("l2", n=300, seed=4)
    graph = build_mrpg(ds, BuildParams(K=4, seed=4, connect=False))
    assert graph.stats.connect_edges == 0
    assert list(graph.stats.timings) == [
        "NNDescent+",
        "Remove-Detours",
        "Remove-Links",
    ]
    assert graph.is_symmetric()


def test_build_invalid_variant():
    ds = random_dataset("l2", n=20)
    match = "graph variant 'nsg' is not supported"
    with pytest.raises(ConfigurationError, match=match):
        build_mrpg(ds, BuildParams(K=3), variant="nsg")


def test_build_K_too_large():
    ds = random_dataset("l2", n=8)
    with pytest.raises(ConfigurationError, match="must be smaller than the number"):
        build_mrpg(ds, BuildParams(K=8))


def test_build_warns_above_edge_bound():
    ds = random_dataset("l2", n=60)
    # a single leaf without pivots and exact lists over every object: complete graph
    params = BuildParams(K=5, K_prime=59, m=60, capacity=60, edge_factor=1)
    with pytest.warns(UserWarning, match="more than the expected bound of 300"):
        graph = build_mrpg(ds, params)
    assert graph.num_edges == 60 * 59 // 2


def test_build_edit_metric():
    ds = random_dataset("edit", n=120)
    graph = build_mrpg(ds, BuildParams(K=4))
    assert graph.num_components() == 1
    assert graph.is_symmetric()
