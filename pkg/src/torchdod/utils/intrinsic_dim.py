import math

import torch

from ..data.dataset import Dataset
from ..lib.seeding import make_generator

#: Below this estimate, a dataset is considered low-dimensional.
LOW_DIMENSION = 5.0


def estimate_intrinsic_dimension(
    dataset: Dataset,
    sample_size: int = 100,
    n_neighbors: int = 10,
    seed: int = 0,
) -> float:
    r"""
    Maximum-likelihood estimate of the intrinsic dimensionality of a dataset.

    For each sampled object with nearest-neighbor distances
    :math:`T_1 \le \dots \le T_k`, the inverse local estimate is

    .. math::

        \frac{1}{k - 1} \sum_{j=1}^{k-1} \log \frac{T_k}{T_j}

    and the estimate is the inverse of the mean of these values. Zero distances
    (duplicates) are ignored.

    :param dataset: the objects.
    :param sample_size: number of objects sampled without replacement.
    :param n_neighbors: number of nearest neighbors ``k`` per sampled object.
    :param seed: seed of the sampling.
    :return: the estimate, ``inf`` when no sampled object has two nonzero neighbor
        distances or when all of them are equal.
    """
    if n_neighbors < 2:
        raise ValueError(f"`n_neighbors` must be at least 2, got {n_neighbors}")
    n = dataset.n
    if n < 3:
        return 0.0

    generator = make_generator(seed)
    sample = torch.randperm(n, generator=generator)[: min(sample_size, n)].tolist()

    inverse = []
    for p in sample:
        dists = dataset.distances_block(p, 0, n)
        dists[p] = torch.inf
        dists = dists[(dists > 0) & torch.isfinite(dists)]
        if len(dists) < 2:
            continue
        nearest = torch.sort(dists).values[:n_neighbors]
        logs = torch.log(nearest[-1] / nearest[:-1])
        inverse.append(float(logs.mean()))

    if not inverse:
        return math.inf
    mean = math.fsum(inverse) / len(inverse)
    if mean == 0:
        return math.inf
    return 1.0 / mean
