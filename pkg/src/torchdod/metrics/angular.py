import torch

from .minkowski import MinkowskiMetric


class AngularMetric(MinkowskiMetric):
    r"""
    Angle between two vectors,
    :math:`\arccos\left(\langle x,y\rangle / (\|x\|\,\|y\|)\right)`, in radians.

    Every vector must have a nonzero norm. The angle is evaluated on the unit vectors
    :math:`u, v` as :math:`2\,\mathrm{atan2}(\|u - v\|, \|u + v\|)`, which equals the
    clamped arccos of the cosine similarity but is exactly zero for identical vectors
    and exactly symmetric.
    """

    name = "angular"

    def __init__(self):
        super().__init__(p=2)

    def validate(self, objects: torch.Tensor) -> None:
        super().validate(objects)
        norms = torch.linalg.vector_norm(objects, dim=1)
        zero = torch.nonzero(norms == 0).flatten()
        if len(zero) > 0:
            raise ValueError(
                "angular distance requires vectors with nonzero norm, got "
                f"{len(zero)} zero vector(s), first at index {int(zero[0])}"
            )

    def prepare(self, objects: torch.Tensor) -> torch.Tensor:
        return objects / torch.linalg.vector_norm(objects, dim=1, keepdim=True)

    def one_to_many(self, x: torch.Tensor, ys: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != ys.shape[-1]:
            raise ValueError(
                f"dimensionality mismatch: object has {x.shape[-1]} components, "
                f"others have {ys.shape[-1]}"
            )
        chord = torch.linalg.vector_norm(ys - x, dim=-1)
        span = torch.linalg.vector_norm(ys + x, dim=-1)
        return 2.0 * torch.atan2(chord, span)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"
