from dataclasses import replace
from typing import Optional

from ..data.dataset import Dataset
from ..errors import ConsistencyError
from ..graphs.graph import Mrpg
from ..lib import VpTree
from .counting import greedy_count
from .detector import Detector, DodParams, DodResult, _Worker


class GraphDetector(Detector):
    r"""
    Detector filtering with a proximity graph.

    Each object ``p`` is first classified from the graph:

    - if ``p`` has an exact nearest-neighbor list long enough for ``k``, its neighbors
      are counted among the stored distances. Fewer than ``k`` makes ``p`` an outlier
      without verification, otherwise it is an inlier;
    - otherwise :func:`torchdod.detectors.greedy_counting` gives a lower bound on the
      neighbor count and ``p`` is sent to verification when the bound is below ``k``.

    The counts found by traversal never exceed the exact ones, so no outlier is
    missed.

    :param dataset: the objects.
    :param graph: proximity graph built over ``dataset``.
    :param tree: VP-tree over ``dataset`` used for verification.
    :raises ConsistencyError: if ``graph`` was built over another dataset.
    """

    def __init__(
        self, dataset: Dataset, graph: Mrpg, tree: Optional[VpTree] = None
    ):
        if graph.n != dataset.n:
            raise ConsistencyError(
                f"graph has {graph.n} vertices but the dataset has {dataset.n} objects"
            )
        if graph.checksum and graph.checksum != dataset.checksum():
            raise ConsistencyError(
                "graph was built over a different dataset (checksum mismatch)"
            )
        super().__init__(dataset, tree)
        self.graph = graph

    def _filter(self, p: int, r: float, k: int, worker: _Worker) -> Optional[bool]:
        shortcut = self.graph.exact_neighbor_count(p, r, k)
        if shortcut is not None:
            return shortcut < k

        count, visited = greedy_count(
            self.graph, self.dataset, p, r, k, worker.marker, worker.counter
        )
        worker.visited += visited
        worker.traversed += 1
        return None if count < k else False


def detect(
    dataset: Dataset,
    graph: Mrpg,
    tree: Optional[VpTree],
    params: DodParams,
) -> DodResult:
    """
    Exact distance-based outliers of ``dataset`` using ``graph`` as filter.

    :param dataset: the objects.
    :param graph: proximity graph built over ``dataset``.
    :param tree: VP-tree over ``dataset``, required when ``params.verify_mode`` is
        ``vp_tree``.
    :param params: the query.
    """
    return GraphDetector(dataset, graph, tree).detect(params)


def detect_partitioned(
    dataset: Dataset,
    graph: Mrpg,
    tree: Optional[VpTree],
    params: DodParams,
    threads: int = 1,
) -> DodResult:
    """
    :func:`detect` with ``threads`` workers, each handling a contiguous chunk of a
    random permutation of the objects. The outliers do not depend on ``threads``.
    """
    return detect(dataset, graph, tree, replace(params, threads=threads))
