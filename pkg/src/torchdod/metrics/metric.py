from typing import Any


class DistanceCounter:
    """
    Counts distance evaluations for one run (or one worker of a run).

    Counters are never shared between threads; each worker owns one and the totals are
    combined with :meth:`merge` once the workers are done.
    """

    __slots__ = ("value",)

    def __init__(self, value: int = 0):
        self.value = value

    def add(self, count: int = 1) -> None:
        self.value += count

    def merge(self, *others: "DistanceCounter") -> "DistanceCounter":
        for other in others:
            self.value += other.value
        return self

    def __repr__(self) -> str:
        return f"DistanceCounter({self.value})"


class Metric:
    r"""
    Base class defining the interface for a distance function between the objects of
    a :class:`torchdod.data.Dataset`.

    A metric must satisfy non-negativity, identity, symmetry and the triangle
    inequality. Derived classes implement :meth:`one_to_many`, which evaluates the
    distances between a single object and a batch of objects in the storage format
    returned by :meth:`prepare`. Every distance in the package, scalar or batched, goes
    through :meth:`one_to_many` so that a pair always evaluates to the same value.

    Vector metrics store objects as a ``float64`` :class:`torch.Tensor` of shape
    ``(n, dim)``, string metrics as a list of :class:`str`.
    """

    #: Tag used on the command line and in graph files.
    name: str = ""

    #: Whether objects are real vectors (otherwise strings).
    is_vector: bool = True

    #: Number of objects evaluated per batch by linear scans.
    scan_chunk: int = 4096

    def validate(self, objects: Any) -> None:
        """
        Check that ``objects`` (already converted to the storage format) can be used
        with this metric. Raises :class:`ValueError` otherwise.

        :param objects: the stored objects of a dataset.
        """

    def prepare(self, objects: Any) -> Any:
        """
        Returns the representation used internally to evaluate distances. Defaults to
        the objects themselves.

        :param objects: the stored objects of a dataset.
        """
        return objects

    def one_to_many(self, x: Any, ys: Any):
        """
        Computes the distances between ``x`` and every entry of ``ys``.

        :param x: a single prepared object.
        :param ys: a batch of prepared objects.
        :return: ``float64`` :class:`torch.Tensor` of shape ``(len(ys),)``.
        """
        raise NotImplementedError(
            f"one_to_many is not implemented for {self.__class__.__name__}"
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"
