import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import torch
from torch.profiler import record_function

from ..data.dataset import Dataset
from ..errors import ConfigurationError
from ..lib import VisitMarker, VpTree, map_tasks, split_chunks
from ..lib.seeding import make_generator
from ..metrics import DistanceCounter
from .counting import VERIFY_MODES, exact_counting, resolve_verify_mode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DodParams:
    """
    Parameters of a distance-based outlier query.

    :param r: neighbor radius, non-negative.
    :param k: minimum number of neighbors of an inlier, at least 1.
    :param threads: number of worker threads.
    :param verify_mode: ``vp_tree``, ``linear_scan`` or ``auto``.
    :param seed: seed of the object permutation used with several threads and of the
        sampling done by ``auto`` mode.
    """

    r: float
    k: int
    threads: int = 1
    verify_mode: str = "auto"
    seed: int = 0

    def __post_init__(self):
        if not self.r >= 0:
            raise ConfigurationError(f"`r` must be non-negative, got {self.r}")
        if self.k < 1:
            raise ConfigurationError(f"`k` must be at least 1, got {self.k}")
        if self.threads < 1:
            raise ConfigurationError(
                f"`threads` must be at least 1, got {self.threads}"
            )
        if self.verify_mode not in VERIFY_MODES:
            raise ConfigurationError(
                f"verification mode '{self.verify_mode}' is not supported. Choose "
                f"from {', '.join(VERIFY_MODES)}"
            )


@dataclass
class DodResult:
    """
    Outcome of a detection run.

    :param outliers: sorted ids of the outliers.
    :param candidates: sorted ids of the objects sent to verification.
    :param confirmed: sorted ids of the outliers confirmed during filtering, without
        verification.
    :param filter_time: wall time of the filter phase in seconds.
    :param verify_time: wall time of the verification phase in seconds.
    :param distance_evals: number of distance evaluations of both phases.
    :param rho: mean number of vertices visited per object filtered by traversal.
    :param threads: number of worker threads.
    :param verify_mode: verification mode that was used.
    """

    outliers: list[int] = field(default_factory=list)
    candidates: list[int] = field(default_factory=list)
    confirmed: list[int] = field(default_factory=list)
    filter_time: float = 0.0
    verify_time: float = 0.0
    distance_evals: int = 0
    rho: float = 0.0
    threads: int = 1
    verify_mode: str = "linear_scan"

    @property
    def t(self) -> int:
        """Number of outliers."""
        return len(self.outliers)

    @property
    def candidate_count(self) -> int:
        """Number of objects the filter could not classify as inliers."""
        return len(self.candidates) + len(self.confirmed)

    @property
    def f(self) -> int:
        """Number of false positives of the filter."""
        return self.candidate_count - self.t

    @property
    def verified(self) -> int:
        """Number of objects that went through verification."""
        return len(self.candidates)

    @property
    def total_time(self) -> float:
        return self.filter_time + self.verify_time

    def as_dict(self) -> dict:
        """Summary without the id lists, plus the derived counts."""
        record = asdict(self)
        for name in ("outliers", "candidates", "confirmed"):
            del record[name]
        record.update(
            t=self.t,
            f=self.f,
            candidate_count=self.candidate_count,
            verified=self.verified,
            total_time=self.total_time,
        )
        return record


class _Worker:
    __slots__ = ("marker", "counter", "visited", "traversed")

    def __init__(self, n: int):
        self.marker = VisitMarker(n)
        self.counter = DistanceCounter()
        self.visited = 0
        self.traversed = 0


class Detector:
    r"""
    Base class for exact distance-based outlier detectors.

    An object is an outlier when fewer than ``k`` other objects lie within distance
    ``r`` of it. Detection runs in two phases. The filter phase classifies each object
    with :meth:`_filter`; the verification phase counts the exact neighbors of every
    object the filter left undecided.

    With several threads, object ids are randomly permuted and each worker handles a
    contiguous chunk of the permutation in both phases. Workers share the dataset,
    graph and tree read-only and own their visited set and counters, so the result does
    not depend on the number of threads.

    :param dataset: the objects.
    :param tree: VP-tree over ``dataset`` used for verification.
    """

    #: Verification mode imposed by the detector, ``None`` to follow the parameters.
    verify_mode: Optional[str] = None

    def __init__(self, dataset: Dataset, tree: Optional[VpTree] = None):
        self.dataset = dataset
        self.tree = tree

    def _filter(self, p: int, r: float, k: int, worker: _Worker) -> Optional[bool]:
        """
        Classifies ``p``.

        :return: ``True`` for an outlier confirmed without verification, ``False`` for
            an inlier and ``None`` when ``p`` must be verified.
        """
        raise NotImplementedError(
            f"_filter is not implemented for {self.__class__.__name__}"
        )

    def detect(self, params: DodParams) -> DodResult:
        """
        Finds the outliers of ``self.dataset`` for the query ``params``.

        :param params: query and execution parameters.
        :return: the outliers and the measurements of the run.
        """
        mode = self.verify_mode or params.verify_mode
        mode, self.tree = resolve_verify_mode(
            self.dataset, mode, self.tree, params.seed
        )

        n = self.dataset.n
        r, k, threads = params.r, params.k, params.threads
        if threads == 1:
            order = list(range(n))
        else:
            order = torch.randperm(n, generator=make_generator(params.seed)).tolist()
        chunks = split_chunks(order, threads)
        workers = [_Worker(n) for _ in range(threads)]

        def filter_chunk(index: int) -> tuple[list[int], list[int]]:
            worker = workers[index]
            confirmed, candidates = [], []
            for p in chunks[index]:
                verdict = self._filter(p, r, k, worker)
                if verdict is None:
                    candidates.append(p)
                elif verdict:
                    confirmed.append(p)
            return confirmed, candidates

        tick = time.perf_counter()
        with record_function("Detector: filter"):
            filtered = map_tasks(filter_chunk, range(threads), threads)
        filter_time = time.perf_counter() - tick

        def verify_chunk(index: int) -> list[int]:
            worker = workers[index]
            return [
                p
                for p in filtered[index][1]
                if exact_counting(
                    self.dataset, self.tree, p, r, k, mode, worker.counter
                )
                < k
            ]

        tick = time.perf_counter()
        with record_function("Detector: verify"):
            verified = map_tasks(verify_chunk, range(threads), threads)
        verify_time = time.perf_counter() - tick

        confirmed = sorted(p for chunk, _ in filtered for p in chunk)
        candidates = sorted(p for _, chunk in filtered for p in chunk)
        outliers = sorted(confirmed + [p for chunk in verified for p in chunk])
        traversed = sum(worker.traversed for worker in workers)
        visited = sum(worker.visited for worker in workers)

        result = DodResult(
            outliers=outliers,
            candidates=candidates,
            confirmed=confirmed,
            filter_time=filter_time,
            verify_time=verify_time,
            distance_evals=DistanceCounter()
            .merge(*(worker.counter for worker in workers))
            .value,
            rho=visited / traversed if traversed else 0.0,
            threads=threads,
            verify_mode=mode,
        )
        logger.info(
            "%s: %d outliers, %d candidates, %d distance evaluations",
            self.__class__.__name__,
            result.t,
            result.candidate_count,
            result.distance_evals,
        )
        return result


class NestedLoopDetector(Detector):
    """
    Baseline that verifies every object with a linear scan stopping at ``k``
    neighbors.
    """

    verify_mode = "linear_scan"

    def _filter(self, p: int, r: float, k: int, worker: _Worker) -> Optional[bool]:
        return None


class VpTreeDetector(Detector):
    """
    Baseline that verifies every object with a range count on a VP-tree, built on
    construction when not given.

    :param dataset: the objects.
    :param tree: VP-tree over ``dataset``.
    :param capacity: leaf capacity of the tree built when ``tree`` is ``None``.
    :param seed: seed of that tree.
    """

    verify_mode = "vp_tree"

    def __init__(
        self,
        dataset: Dataset,
        tree: Optional[VpTree] = None,
        capacity: int = 20,
        seed: int = 0,
    ):
        if tree is None:
            tree = VpTree(dataset, capacity=capacity, seed=seed)
        super().__init__(dataset, tree)

    def _filter(self, p: int, r: float, k: int, worker: _Worker) -> Optional[bool]:
        return None

