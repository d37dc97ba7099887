from collections.abc import Sequence
from typing import TypeVar

import torch

T = TypeVar("T")

_SEED_BOUND = 2**62


def make_generator(seed: int) -> torch.Generator:
    """A CPU :class:`torch.Generator` seeded with ``seed``."""
    generator = torch.Generator()
    generator.manual_seed(int(seed))
    return generator


def spawn_seed(generator: torch.Generator) -> int:
    """Draws a seed for a child generator."""
    return int(torch.randint(0, _SEED_BOUND, (1,), generator=generator))


def spawn_seeds(generator: torch.Generator, count: int) -> list[int]:
    """Draws ``count`` child seeds at once."""
    if count == 0:
        return []
    return torch.randint(0, _SEED_BOUND, (count,), generator=generator).tolist()


def random_index(generator: torch.Generator, size: int) -> int:
    """A uniform index in ``0..size-1``."""
    return int(torch.randint(0, size, (1,), generator=generator))


def random_choice(generator: torch.Generator, items: Sequence[T]) -> T:
    """A uniform element of ``items`` (which must not be empty)."""
    return items[random_index(generator, len(items))]


def random_sample(
    generator: torch.Generator, items: Sequence[T], count: int
) -> list[T]:
    """Up to ``count`` distinct elements of ``items``, drawn uniformly."""
    if count >= len(items):
        order = torch.randperm(len(items), generator=generator).tolist()
        return [items[i] for i in order]
    order = torch.randperm(len(items), generator=generator)[:count].tolist()
    return [items[i] for i in order]
