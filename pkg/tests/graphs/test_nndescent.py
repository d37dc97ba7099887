import sys
from pathlib import Path

import pytest
import torch

from torchdod.data import Dataset
from torchdod.errors import ConfigurationError
from torchdod.graphs import BuildParams, descend, exact_knn, nndescent, nndescent_plus
from torchdod.lib import NeighborList
from torchdod.oracle import exact_neighbors

sys.path.append(str(Path(__file__).parents[1]))
from helpers import random_dataset


def recall(aknn, ds, K):
    hits = 0
    for p in range(ds.n):
        hits += len(set(aknn.lists[p].ids) & set(exact_neighbors(ds, p, K)))
    return hits / (ds.n * K)


def check_lists(aknn, n, K):
    for p, neighbors in enumerate(aknn.lists):
        assert neighbors.owner == p
        assert p not in neighbors.ids
        assert len(set(neighbors.ids)) == len(neighbors.ids)
        assert neighbors.dists == sorted(neighbors.dists)
        assert len(neighbors) == min(K, n - 1) or p in aknn.exact


def test_nndescent_quality():
    ds = random_dataset("l2", n=300, dim=3)
    aknn = nndescent(ds, K=8, seed=0)
    check_lists(aknn, ds.n, 8)
    assert aknn.iterations >= 1
    assert aknn.distance_evals > 0
    assert recall(aknn, ds, 8) >= 0.9


def test_nndescent_is_seeded():
    ds = random_dataset("l2", n=120)
    a = nndescent(ds, K=5, seed=3)
    b = nndescent(ds, K=5, seed=3)
    assert [x.ids for x in a.lists] == [x.ids for x in b.lists]


def test_nndescent_zero_iterations_keeps_random_lists():
    ds = random_dataset("l2", n=60)
    aknn = nndescent(ds, K=4, max_iters=0)
    assert aknn.iterations == 0
    check_lists(aknn, ds.n, 4)


def test_nndescent_invalid_K():
    ds = random_dataset("l2", n=10)
    with pytest.raises(ConfigurationError, match=r"`K` \(10\) must be positive"):
        nndescent(ds, K=10)


def test_saturated_lists():
    ds = Dataset([[0.0], [1.0], [3.0], [7.0]], metric="l1")
    aknn = nndescent(ds, K=3)
    for p in range(ds.n):
        assert sorted(aknn.lists[p].ids) == [q for q in range(4) if q != p]


def test_nndescent_plus_quality():
    ds = random_dataset("l2", n=400, dim=3)
    aknn = nndescent_plus(ds, BuildParams(K=8, seed=1))
    check_lists(aknn, ds.n, 8)
    assert aknn.pivots
    assert recall(aknn, ds, 8) >= 0.9


def test_exact_lists():
    ds = random_dataset("l2", n=300)
    params = BuildParams(K=5, K_prime=12, m=7)
    aknn = nndescent_plus(ds, params)
    assert len(aknn.exact) == 7
    for p in aknn.exact:
        assert aknn.lists[p].ids == exact_neighbors(ds, p, 12)


def test_exact_flags_go_to_sparse_objects():
    generator = torch.Generator().manual_seed(0)
    cloud = torch.randn(200, 2, generator=generator, dtype=torch.float64)
    far = torch.tensor([[50.0, 50.0], [-60.0, 40.0]], dtype=torch.float64)
    points = torch.cat([cloud, far])
    ds = Dataset(points, metric="l2")
    aknn = nndescent_plus(ds, BuildParams(K=5, m=2))
    assert aknn.exact == {200, 201}


def test_distance_sums_never_grow():
    ds = random_dataset("l2", n=300, seed=5)
    aknn = nndescent(ds, 6, max_iters=0, seed=5)
    sums = [neighbors.sum_distances() for neighbors in aknn.lists]
    for _ in range(4):
        descend(ds, aknn.lists, 1)
        current = [neighbors.sum_distances() for neighbors in aknn.lists]
        assert all(new <= old for new, old in zip(current, sums))
        sums = current


def test_exact_lists_never_grow_distance_sums():
    ds = random_dataset("l2", n=300, seed=5)
    plain = nndescent_plus(ds, BuildParams(K=6, m=0, seed=1))
    flagged = nndescent_plus(ds, BuildParams(K=6, m=20, seed=1))
    assert len(flagged.exact) == 20
    for p in flagged.exact:
        exact_sum = sum(flagged.lists[p].dists[:6])
        assert exact_sum <= plain.lists[p].sum_distances() + 1e-9


@pytest.mark.parametrize("skip_updates", [True, False])
def test_skip_rule_reaches_same_quality(skip_updates):
    ds = random_dataset("l2", n=300, dim=3)
    aknn = nndescent_plus(ds, BuildParams(K=8, skip_updates=skip_updates, m=0))
    assert recall(aknn, ds, 8) >= 0.9


def test_skip_rule_saves_distances():
    ds = random_dataset("l2", n=300, dim=3)
    skipping = nndescent_plus(ds, BuildParams(K=8, m=0))
    full = nndescent_plus(ds, BuildParams(K=8, m=0, skip_updates=False))
    assert skipping.distance_evals < full.distance_evals
    # skipped neighborhoods only repeat rejected candidates
    assert [x.ids for x in skipping.lists] == [x.ids for x in full.lists]
    assert skipping.iterations == full.iterations


def test_exact_knn_ties_by_id():
    ds = Dataset([[0.0], [1.0], [-1.0], [2.0]], metric="l1")
    neighbors = exact_knn(ds, 0, 2)
    assert neighbors == NeighborList.from_candidates(0, 2, [1, 2], [1.0, 1.0])
    assert neighbors.ids == [1, 2]


def test_exact_knn_invalid():
    ds = Dataset([[0.0], [1.0]], metric="l1")
    with pytest.raises(ConfigurationError, match="`K_prime` must be between 1 and 1"):
        exact_knn(ds, 0, 2)


def test_edit_metric():
    ds = random_dataset("edit", n=100)
    aknn = nndescent_plus(ds, BuildParams(K=5, m=3))
    check_lists(aknn, ds.n, 5)
