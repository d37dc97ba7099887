from typing import Union

from .angular import AngularMetric
from .edit import EditMetric, levenshtein
from .metric import DistanceCounter, Metric
from .minkowski import L1Metric, L2Metric, L4Metric, MinkowskiMetric

METRICS: dict[str, type[Metric]] = {
    "l1": L1Metric,
    "l2": L2Metric,
    "l4": L4Metric,
    "angular": AngularMetric,
    "edit": EditMetric,
}


def get_metric(metric: Union[str, Metric]) -> Metric:
    """
    Returns a :class:`Metric` instance from its tag (``l1``, ``l2``, ``l4``,
    ``angular`` or ``edit``, case-insensitive), or ``metric`` itself if it already is
    one.
    """
    if isinstance(metric, Metric):
        return metric
    try:
        return METRICS[metric.lower()]()
    except KeyError:
        raise ValueError(
            f"metric '{metric}' is not supported. Choose from {', '.join(METRICS)}"
        ) from None


__all__ = [
    "AngularMetric",
    "DistanceCounter",
    "EditMetric",
    "L1Metric",
    "L2Metric",
    "L4Metric",
    "METRICS",
    "Metric",
    "MinkowskiMetric",
    "get_metric",
    "levenshtein",
]
