import math
from collections.abc import Iterable, Iterator, Sequence
from typing import Union

import torch

Values = Union[Sequence, torch.Tensor]


class NeighborList:
    r"""
    Bounded list of the closest known neighbors of one object.

    Entries are ``(distance, id)`` pairs kept sorted ascending by distance with ties
    broken by ascending id. The list never contains its owner or duplicate ids and
    holds at most ``capacity`` entries.

    :param owner: id of the object the list belongs to.
    :param capacity: maximum number of entries.
    """

    __slots__ = ("owner", "capacity", "ids", "dists")

    def __init__(self, owner: int, capacity: int):
        if capacity < 1:
            raise ValueError(f"`capacity` must be at least 1, got {capacity}")
        self.owner = owner
        self.capacity = capacity
        self.ids: list[int] = []
        self.dists: list[float] = []

    @classmethod
    def from_candidates(
        cls, owner: int, capacity: int, ids: Values, dists: Values
    ) -> "NeighborList":
        """Builds a list holding the best ``capacity`` of the given candidates."""
        neighbors = cls(owner, capacity)
        neighbors.merge(ids, dists)
        return neighbors

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[tuple[float, int]]:
        return zip(self.dists, self.ids)

    def __contains__(self, item: int) -> bool:
        return item in self.ids

    def __eq__(self, other) -> bool:
        if not isinstance(other, NeighborList):
            return NotImplemented
        return (
            self.owner == other.owner
            and self.ids == other.ids
            and self.dists == other.dists
        )

    def __repr__(self) -> str:
        return f"NeighborList(owner={self.owner}, ids={self.ids})"

    @property
    def is_full(self) -> bool:
        return len(self.ids) == self.capacity

    def worst(self) -> float:
        """Largest stored distance, or ``inf`` while the list is not full."""
        if not self.is_full:
            return math.inf
        return self.dists[-1]

    def mean_distance(self) -> float:
        """Mean stored distance, ``inf`` for an empty list."""
        if not self.ids:
            return math.inf
        return math.fsum(self.dists) / len(self.dists)

    def sum_distances(self) -> float:
        return math.fsum(self.dists)

    def merge(self, ids: Values, dists: Values) -> bool:
        """
        Inserts the candidates that improve the list.

        :param ids: candidate ids; the owner and ids already present are ignored.
        :param dists: distances from the owner to the candidates.
        :return: whether the list changed.
        """
        if isinstance(dists, torch.Tensor):
            if self.is_full:
                keep = dists <= self.dists[-1]
                if not torch.any(keep):
                    return False
                ids = torch.as_tensor(ids)[keep]
                dists = dists[keep]
            ids = ids.tolist() if isinstance(ids, torch.Tensor) else list(ids)
            dists = dists.tolist()
        elif isinstance(ids, torch.Tensor):
            ids = ids.tolist()

        present = set(self.ids)
        present.add(self.owner)
        bound = (self.dists[-1], self.ids[-1]) if self.is_full else None

        fresh: dict[int, float] = {}
        for i, d in zip(ids, dists):
            i = int(i)
            if i in present or i in fresh:
                continue
            d = float(d)
            if bound is not None and (d, i) >= bound:
                continue
            fresh[i] = d
        if not fresh:
            return False

        entries = list(zip(self.dists, self.ids))
        entries.extend((d, i) for i, d in fresh.items())
        entries.sort()
        del entries[self.capacity :]

        dists_new = [d for d, _ in entries]
        ids_new = [i for _, i in entries]
        if ids_new == self.ids:
            return False
        self.ids = ids_new
        self.dists = dists_new
        return True

    def count_within(self, r: float, k: int) -> int:
        """Number of stored neighbors within distance ``r``, capped at ``k``."""
        count = 0
        for d in self.dists:
            if d > r:
                break
            count += 1
            if count == k:
                break
        return count


def neighbor_ids(lists: Iterable[NeighborList]) -> list[list[int]]:
    """The ids of every list, in list order."""
    return [list(neighbors.ids) for neighbors in lists]
