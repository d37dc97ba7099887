import hashlib
from collections.abc import Sequence
from typing import Optional, Union

import torch

from ..metrics import DistanceCounter, Metric, get_metric

Ids = Union[Sequence[int], torch.Tensor]


class Dataset:
    r"""
    An ordered, immutable collection of ``n`` objects paired with a metric.

    Objects are identified by their position ``0..n-1``. Real vectors are stored as a
    ``float64`` tensor of shape ``(n, dim)`` (a one-dimensional input is read as ``n``
    scalars), strings as a list.

    :param objects: the objects, either vectors (anything :func:`torch.as_tensor`
        accepts) or a list of strings for the ``edit`` metric.
    :param metric: a :class:`torchdod.metrics.Metric` or its tag.
    :param normalize: rescale every vector to unit norm when loading. Only valid for
        vector metrics.

    >>> ds = Dataset([0.0, 1.0, 2.0, 10.0], metric="l1")
    >>> ds.n, ds.dim
    (4, 1)
    >>> ds.distance(0, 3)
    10.0
    """

    def __init__(
        self,
        objects,
        metric: Union[str, Metric],
        normalize: bool = False,
    ):
        self.metric = get_metric(metric)

        if self.metric.is_vector:
            objects = torch.as_tensor(objects, dtype=torch.float64)
            if objects.dim() == 1:
                objects = objects.reshape(-1, 1)
            if objects.dim() != 2:
                raise ValueError(
                    "vector objects must have shape [n, dim], got "
                    f"{list(objects.shape)}"
                )
            if normalize:
                norms = torch.linalg.vector_norm(objects, dim=1, keepdim=True)
                if torch.any(norms == 0):
                    raise ValueError(
                        "cannot normalize a dataset containing zero vectors"
                    )
                objects = objects / norms
            objects = objects.contiguous()
        else:
            if normalize:
                raise ValueError(
                    f"`normalize` is only supported for vector metrics, not "
                    f"'{self.metric.name}'"
                )
            objects = list(objects)

        if len(objects) == 0:
            raise ValueError("a dataset must contain at least one object")

        self.metric.validate(objects)
        self._objects = objects
        self._prepared = self.metric.prepare(objects)
        self._checksum: Optional[bytes] = None

    @property
    def n(self) -> int:
        """Number of objects."""
        return len(self._objects)

    @property
    def dim(self) -> Optional[int]:
        """Dimensionality of the vectors, ``None`` for strings."""
        if self.metric.is_vector:
            return self._objects.shape[1]
        return None

    @property
    def objects(self):
        """The stored objects (normalized if requested at construction)."""
        return self._objects

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, index: int):
        return self._objects[index]

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, metric={self.metric.name!r})"

    def distances(
        self, a: int, ids: Ids, counter: Optional[DistanceCounter] = None
    ) -> torch.Tensor:
        """
        Distances between object ``a`` and each object of ``ids``.

        :param a: id of the query object.
        :param ids: ids of the other objects.
        :param counter: incremented by ``len(ids)``.
        :return: ``float64`` tensor of shape ``(len(ids),)``.
        """
        if counter is not None:
            counter.add(len(ids))
        if len(ids) == 0:
            return torch.zeros(0, dtype=torch.float64)

        if self.metric.is_vector:
            index = torch.as_tensor(ids, dtype=torch.long)
            return self.metric.one_to_many(self._prepared[a], self._prepared[index])

        others = [self._prepared[int(i)] for i in ids]
        return self.metric.one_to_many(self._prepared[a], others)

    def distances_block(
        self,
        a: int,
        start: int,
        stop: int,
        counter: Optional[DistanceCounter] = None,
    ) -> torch.Tensor:
        """
        Distances between object ``a`` and the objects ``start..stop-1``.

        Equivalent to ``distances(a, range(start, stop))`` without building an index.
        """
        if counter is not None:
            counter.add(stop - start)
        return self.metric.one_to_many(
            self._prepared[a], self._prepared[start:stop]
        )

    def distance(
        self, a: int, b: int, counter: Optional[DistanceCounter] = None
    ) -> float:
        """Distance between objects ``a`` and ``b``."""
        return float(self.distances(a, [b], counter)[0])

    def subset(self, ids: Ids) -> "Dataset":
        """
        A new dataset made of the objects ``ids`` (renumbered ``0..len(ids)-1``) with
        the same metric.
        """
        if self.metric.is_vector:
            objects = self._objects[torch.as_tensor(ids, dtype=torch.long)]
        else:
            objects = [self._objects[int(i)] for i in ids]
        return Dataset(objects, metric=self.metric)

    def checksum(self) -> bytes:
        """SHA-256 digest of the metric tag and the stored objects."""
        if self._checksum is None:
            digest = hashlib.sha256(self.metric.name.encode())
            if self.metric.is_vector:
                digest.update(self._objects.numpy().tobytes())
            else:
                for obj in self._objects:
                    digest.update(obj.encode("utf-8"))
                    digest.update(b"\0")
            self._checksum = digest.digest()
        return self._checksum


def distance_counted(
    ds: Dataset, a: int, b: int, counter: Optional[DistanceCounter] = None
) -> float:
    """Distance between ``a`` and ``b``, incrementing ``counter`` by one."""
    return ds.distance(a, b, counter)
