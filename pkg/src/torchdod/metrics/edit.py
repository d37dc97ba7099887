import torch

from .metric import Metric


def levenshtein(a: str, b: str) -> int:
    """
    Levenshtein distance between two strings: the minimum number of single-character
    insertions, deletions and substitutions turning ``a`` into ``b``.

    The full dynamic-programming table is evaluated (row by row, without banding).

    >>> levenshtein("kitten", "sitting")
    3
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


class EditMetric(Metric):
    """Edit (Levenshtein) distance between strings."""

    name = "edit"
    is_vector = False
    scan_chunk = 64

    def validate(self, objects: list[str]) -> None:
        for i, obj in enumerate(objects):
            if not isinstance(obj, str):
                raise ValueError(
                    f"edit distance requires string objects, got {type(obj).__name__} "
                    f"at index {i}"
                )

    def one_to_many(self, x: str, ys: list[str]) -> torch.Tensor:
        return torch.tensor([levenshtein(x, y) for y in ys], dtype=torch.float64)
