import logging
from dataclasses import dataclass, field
from typing import Optional

import torch

from ..data.dataset import Dataset
from ..metrics import DistanceCounter
from .seeding import make_generator, random_index, spawn_seed

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class VpNode:
    """
    Node of a :class:`VpTree`.

    Internal nodes hold a vantage object and the split radius ``mu``: objects within
    ``mu`` of the vantage (the vantage included) live in the left subtree, the others
    in the right one. Leaves hold their members.
    """

    vantage: int = -1
    mu: float = 0.0
    left: Optional["VpNode"] = None
    right: Optional["VpNode"] = None
    leaf_members: Optional[list[int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf_members is not None


@dataclass
class Partition:
    """Groups and pivots taken from the left leaves of one :class:`VpTree`."""

    groups: list[list[int]] = field(default_factory=list)
    pivots: set[int] = field(default_factory=set)


class VpTree:
    r"""
    Vantage-point tree over a dataset, used for exact range counting and for the
    partition-based initialization of graph construction.

    Each internal node draws a random vantage among its members and splits them at the
    mean distance ``mu`` from the vantage to the other members. Nodes with at most
    ``capacity`` members become leaves. A split that would leave the right side empty
    (all other members equidistant from the vantage) also produces a leaf, which may
    then be larger than ``capacity``.

    :param dataset: the indexed objects.
    :param capacity: maximum leaf size, at least 2.
    :param seed: seed for the vantage choices.
    :param members: the ids to index, all objects by default.
    :param counter: incremented with the distance evaluations spent on construction.
    """

    def __init__(
        self,
        dataset: Dataset,
        capacity: int = 20,
        seed: int = 0,
        members: Optional[list[int]] = None,
        counter: Optional[DistanceCounter] = None,
    ):
        if capacity < 2:
            raise ValueError(f"`capacity` must be at least 2, got {capacity}")

        self.dataset = dataset
        self.capacity = capacity
        if members is None:
            members = list(range(dataset.n))
        self.size = len(members)

        generator = make_generator(seed)
        self.root = VpNode()
        stack = [(self.root, members)]
        while stack:
            node, members = stack.pop()
            if len(members) <= capacity:
                node.leaf_members = members
                continue

            vantage = members[random_index(generator, len(members))]
            dists = dataset.distances(vantage, members, counter)
            others = torch.as_tensor(members) != vantage
            mu = float(dists[others].mean())

            inside = dists <= mu
            left = [m for m, keep in zip(members, inside.tolist()) if keep]
            right = [m for m, keep in zip(members, inside.tolist()) if not keep]
            if not right:
                logger.debug(
                    "degenerate split at vantage %d, keeping %d members in one leaf",
                    vantage,
                    len(members),
                )
                node.leaf_members = members
                continue

            node.vantage = vantage
            node.mu = mu
            node.left = VpNode()
            node.right = VpNode()
            stack.append((node.right, right))
            stack.append((node.left, left))

    def __len__(self) -> int:
        return self.size

    def leaves(self) -> list[VpNode]:
        """The leaves, left to right."""
        leaves = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                leaves.append(node)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return leaves

    def depth(self) -> int:
        depth = 0
        stack = [(self.root, 1)]
        while stack:
            node, level = stack.pop()
            depth = max(depth, level)
            if not node.is_leaf:
                stack.append((node.left, level + 1))
                stack.append((node.right, level + 1))
        return depth

    def left_leaf_partition(self) -> Partition:
        """
        Collects the members of every leaf that is a left child as one group. The
        vantage of such a parent is a pivot when the leaf holds at most ``capacity``
        members. A tree reduced to a single leaf yields that leaf as the only group.
        """
        partition = Partition()
        if self.root.is_leaf:
            partition.groups.append(list(self.root.leaf_members))
            return partition

        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            if node.left.is_leaf:
                partition.groups.append(list(node.left.leaf_members))
                if len(node.left.leaf_members) <= self.capacity:
                    partition.pivots.add(node.vantage)
            stack.append(node.right)
            stack.append(node.left)
        return partition

    def range_count(
        self,
        q: int,
        r: float,
        k: int,
        counter: Optional[DistanceCounter] = None,
    ) -> int:
        """
        Counts the indexed objects other than ``q`` within distance ``r`` of ``q``,
        stopping as soon as ``k`` are found.

        A subtree is skipped only when the triangle inequality rules out every member:
        the left one when ``dist(q, vantage) - mu > r``, the right one when
        ``mu - dist(q, vantage) > r``.

        :return: the count, capped at ``k``.
        """
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                members = [m for m in node.leaf_members if m != q]
                if not members:
                    continue
                dists = self.dataset.distances(q, members, counter)
                count += int(torch.count_nonzero(dists <= r))
                if count >= k:
                    return k
                continue

            d = self.dataset.distance(q, node.vantage, counter)
            if node.mu - d <= r:
                stack.append(node.right)
            if d - node.mu <= r:
                stack.append(node.left)
        return count


def build_vptree(
    dataset: Dataset,
    capacity: int = 20,
    seed: int = 0,
    counter: Optional[DistanceCounter] = None,
) -> VpTree:
    """Builds a :class:`VpTree` over every object of ``dataset``."""
    return VpTree(dataset, capacity=capacity, seed=seed, counter=counter)


def partition_for_init(
    dataset: Dataset,
    capacity: int,
    repeats: int = 3,
    seed: int = 0,
    counter: Optional[DistanceCounter] = None,
) -> tuple[Partition, list[int]]:
    """
    Builds ``repeats`` independently seeded VP-trees and merges their left-leaf
    partitions.

    :return: the merged groups and pivots, and the sorted ids of the objects covered
        by no group.
    """
    generator = make_generator(seed)
    merged = Partition()
    for _ in range(repeats):
        tree_seed = spawn_seed(generator)
        partition = VpTree(
            dataset, capacity=capacity, seed=tree_seed, counter=counter
        ).left_leaf_partition()
        merged.groups.extend(partition.groups)
        merged.pivots.update(partition.pivots)

    covered = set()
    for group in merged.groups:
        covered.update(group)
    uncovered = [i for i in range(dataset.n) if i not in covered]
    return merged, uncovered
