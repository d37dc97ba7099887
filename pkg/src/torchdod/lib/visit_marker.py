class VisitMarker:
    """
    Per-worker visited set over ``0..n-1`` that resets in constant time.

    Each vertex stores the epoch at which it was last marked. Resetting starts a new
    epoch, which unmarks every vertex at once.

    :param n: number of vertices.
    """

    __slots__ = ("_stamps", "_epoch")

    def __init__(self, n: int):
        self._stamps = [0] * n
        self._epoch = 1

    def __len__(self) -> int:
        return len(self._stamps)

    def reset(self) -> None:
        self._epoch += 1

    def mark(self, v: int) -> None:
        self._stamps[v] = self._epoch

    def is_marked(self, v: int) -> bool:
        return self._stamps[v] == self._epoch

    def check_and_mark(self, v: int) -> bool:
        """Marks ``v`` and returns ``True`` if it was not marked yet."""
        if self._stamps[v] == self._epoch:
            return False
        self._stamps[v] = self._epoch
        return True
