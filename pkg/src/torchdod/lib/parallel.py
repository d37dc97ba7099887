from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")


def split_chunks(items: Sequence[T], parts: int) -> list[Sequence[T]]:
    """
    Splits ``items`` into ``parts`` contiguous chunks whose sizes differ by at most
    one. Chunks may be empty when there are fewer items than parts.
    """
    if parts < 1:
        raise ValueError(f"`parts` must be at least 1, got {parts}")
    size, extra = divmod(len(items), parts)
    chunks = []
    start = 0
    for i in range(parts):
        stop = start + size + (i < extra)
        chunks.append(items[start:stop])
        start = stop
    return chunks


def map_tasks(
    function: Callable[[T], R], tasks: Sequence[T], threads: int
) -> list[R]:
    """
    Applies ``function`` to every task on a pool of ``threads`` threads and returns
    the results in task order. With a single thread the work runs inline.
    """
    if threads == 1:
        return [function(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, tasks))


def map_chunks(
    function: Callable[[Sequence[T]], R], items: Sequence[T], threads: int
) -> list[R]:
    """
    Applies ``function`` to ``threads`` contiguous chunks of ``items`` and returns the
    results in chunk order.
    """
    return map_tasks(function, split_chunks(items, threads), threads)
