import torch

from .metric import Metric


class MinkowskiMetric(Metric):
    r"""
    :math:`L_p`-norm distance :math:`\left(\sum_i |x_i - y_i|^p\right)^{1/p}` between
    real vectors.

    :param p: order of the norm, ``p >= 1``.
    """

    def __init__(self, p: float):
        if p < 1:
            raise ValueError(f"`p` must be at least 1 to define a metric, got {p}")
        self.p = p

    def validate(self, objects: torch.Tensor) -> None:
        if objects.dim() != 2:
            raise ValueError(
                "vector objects must be a tensor with shape [n, dim], got tensor "
                f"with shape {list(objects.shape)}"
            )

    def one_to_many(self, x: torch.Tensor, ys: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != ys.shape[-1]:
            raise ValueError(
                f"dimensionality mismatch: object has {x.shape[-1]} components, "
                f"others have {ys.shape[-1]}"
            )
        return torch.linalg.vector_norm(ys - x, ord=self.p, dim=-1)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(p={self.p})"


class L1Metric(MinkowskiMetric):
    """Manhattan distance."""

    name = "l1"

    def __init__(self):
        super().__init__(p=1)


class L2Metric(MinkowskiMetric):
    """Euclidean distance."""

    name = "l2"

    def __init__(self):
        super().__init__(p=2)


class L4Metric(MinkowskiMetric):
    """Fourth-root of the sum of fourth powers of the coordinate differences."""

    name = "l4"

    def __init__(self):
        super().__init__(p=4)
