import string
from typing import Optional

import torch

from ..lib.seeding import make_generator, random_index


def gaussian_mixture(
    n: int,
    dim: int = 2,
    n_clusters: int = 5,
    outlier_fraction: float = 0.01,
    spread: float = 1.0,
    box: float = 20.0,
    seed: int = 0,
) -> tuple[torch.Tensor, torch.Tensor]:
    r"""
    Points drawn from a mixture of isotropic Gaussians plus uniformly scattered
    outliers.

    Cluster centers are uniform in :math:`[-box/2, box/2]^{dim}` and members are
    normally distributed around them with standard deviation ``spread``. The planted
    points are uniform in the twice larger box :math:`[-box, box]^{dim}`.

    :param n: total number of points.
    :param dim: dimensionality.
    :param n_clusters: number of Gaussian components.
    :param outlier_fraction: fraction of planted points.
    :param spread: standard deviation of each component.
    :param box: side length of the box containing the cluster centers.
    :param seed: seed of the generator.
    :return: ``float64`` points of shape ``(n, dim)`` in random order and the sorted
        ids of the planted points.
    """
    if n < 1 or dim < 1 or n_clusters < 1:
        raise ValueError("`n`, `dim` and `n_clusters` must be at least 1")
    if not 0 <= outlier_fraction <= 1:
        raise ValueError(
            f"`outlier_fraction` must be between 0 and 1, got {outlier_fraction}"
        )
    generator = make_generator(seed)
    n_planted = round(n * outlier_fraction)
    n_members = n - n_planted

    centers = torch.rand(n_clusters, dim, generator=generator, dtype=torch.float64)
    centers = (centers - 0.5) * box
    labels = torch.randint(0, n_clusters, (n_members,), generator=generator)
    members = centers[labels] + spread * torch.randn(
        n_members, dim, generator=generator, dtype=torch.float64
    )
    planted = (
        torch.rand(n_planted, dim, generator=generator, dtype=torch.float64) - 0.5
    ) * (2 * box)

    order = torch.randperm(n, generator=generator)
    points = torch.empty(n, dim, dtype=torch.float64)
    points[order[:n_members]] = members
    points[order[n_members:]] = planted
    return points, torch.sort(order[n_members:]).values


def _mutate(word: str, edits: int, alphabet: str, generator: torch.Generator) -> str:
    chars = list(word)
    for _ in range(edits):
        operation = int(torch.randint(0, 3, (1,), generator=generator))
        letter = alphabet[random_index(generator, len(alphabet))]
        if operation == 0 or not chars:
            position = int(torch.randint(0, len(chars) + 1, (1,), generator=generator))
            chars.insert(position, letter)
        elif operation == 1:
            position = int(torch.randint(0, len(chars), (1,), generator=generator))
            chars[position] = letter
        elif len(chars) > 1:
            position = int(torch.randint(0, len(chars), (1,), generator=generator))
            del chars[position]
    return "".join(chars)


def _random_word(length: int, alphabet: str, generator: torch.Generator) -> str:
    letters = torch.randint(0, len(alphabet), (length,), generator=generator).tolist()
    return "".join(alphabet[i] for i in letters)


def clustered_words(
    n: int,
    n_clusters: int = 20,
    outlier_fraction: float = 0.01,
    max_edits: int = 2,
    alphabet: Optional[str] = None,
    seed: int = 0,
) -> tuple[list[str], list[int]]:
    """
    Strings grouped around random base words, plus long random strings as outliers.

    Base words have 6 to 10 letters; every member is its base word after up to
    ``max_edits`` random insertions, substitutions or deletions. Planted strings have
    14 to 20 letters.

    :return: the strings in random order and the sorted ids of the planted ones.
    """
    if n < 1 or n_clusters < 1:
        raise ValueError("`n` and `n_clusters` must be at least 1")
    if alphabet is None:
        alphabet = string.ascii_lowercase
    generator = make_generator(seed)
    n_planted = round(n * outlier_fraction)

    lengths = torch.randint(6, 11, (n_clusters,), generator=generator).tolist()
    bases = [_random_word(length, alphabet, generator) for length in lengths]
    words = []
    for _ in range(n - n_planted):
        base = bases[int(torch.randint(0, n_clusters, (1,), generator=generator))]
        edits = int(torch.randint(0, max_edits + 1, (1,), generator=generator))
        words.append(_mutate(base, edits, alphabet, generator))
    for _ in range(n_planted):
        length = int(torch.randint(14, 21, (1,), generator=generator))
        words.append(_random_word(length, alphabet, generator))

    order = torch.randperm(n, generator=generator).tolist()
    shuffled = [""] * n
    for source, target in enumerate(order):
        shuffled[target] = words[source]
    planted = sorted(order[n - n_planted :])
    return shuffled, planted
