"""Test utilities wrap common functions in the tests"""

from pathlib import Path

import torch

from torchdod.data import Dataset, clustered_words, gaussian_mixture

DTYPE = torch.float64
DIR_PATH = Path(__file__).parent

# 1-D toy set: with L1, r=1.5 and k=1 only the last point (id 3) is an outlier
TOY_POINTS = [0.0, 1.0, 2.0, 10.0]

VECTOR_METRICS = ["l1", "l2", "l4", "angular"]


def toy_dataset(metric: str = "l1") -> Dataset:
    return Dataset(TOY_POINTS, metric=metric)


def random_dataset(metric: str = "l2", n: int = 300, dim: int = 4, seed: int = 0):
    """Clustered data with a few planted outliers, strings for the edit metric."""
    if metric == "edit":
        words, _ = clustered_words(n, n_clusters=8, outlier_fraction=0.03, seed=seed)
        return Dataset(words, metric="edit")
    points, _ = gaussian_mixture(
        n, dim=dim, n_clusters=4, outlier_fraction=0.03, seed=seed
    )
    if metric == "angular":
        # keep every vector away from the origin
        points = points + 30.0
    return Dataset(points, metric=metric)


def kth_neighbor_distances(dataset: Dataset, k: int) -> torch.Tensor:
    """Distance from every object to its k-th nearest other object."""
    kth = torch.empty(dataset.n, dtype=DTYPE)
    for p in range(dataset.n):
        dists = dataset.distances_block(p, 0, dataset.n)
        dists[p] = torch.inf
        kth[p] = torch.sort(dists).values[k - 1]
    return kth


def radius_for_ratio(dataset: Dataset, k: int, ratio: float) -> float:
    """
    A radius making roughly ``ratio`` of the objects outliers for ``k``, halfway
    between two k-th neighbor distances so that no distance sits on the boundary.
    """
    kth = torch.sort(kth_neighbor_distances(dataset, k)).values
    index = min(int((1.0 - ratio) * (dataset.n - 1)), dataset.n - 2)
    return float(kth[index] + kth[index + 1]) / 2


def chain_dataset() -> tuple[Dataset, list[set[int]]]:
    """Objects at 0, 5 and 2 linked as the path 0 - 1 - 2."""
    dataset = Dataset([0.0, 5.0, 2.0], metric="l1")
    adjacency = [{1}, {0, 2}, {1}]
    return dataset, adjacency
