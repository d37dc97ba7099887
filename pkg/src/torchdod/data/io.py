import csv
import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import DatasetFormatError
from ..graphs.graph import VARIANTS, Mrpg
from ..lib import NeighborList
from .dataset import Dataset

PathLike = Union[str, Path]

FORMATS = ("fvecs", "bvecs", "csv", "words")

GRAPH_MAGIC = b"TDOD"
GRAPH_VERSION = 1
# magic, version, n, K, K', variant, dataset checksum
_HEADER = struct.Struct("<4sHIIIB32s")
_VERTEX = struct.Struct("<BI")
_COUNT = struct.Struct("<I")

_PIVOT_FLAG = 1
_EXACT_FLAG = 2


def _read_vecs(path: PathLike, dtype: np.dtype, kind: str) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size < 4:
        raise DatasetFormatError(f"{path}: file too small for a {kind} record")
    dim = int(raw[:4].view("<i4")[0])
    if dim <= 0:
        raise DatasetFormatError(f"{path}: invalid dimension {dim} at offset 0")

    itemsize = np.dtype(dtype).itemsize
    record = 4 + dim * itemsize
    if raw.size % record != 0:
        raise DatasetFormatError(
            f"{path}: size {raw.size} is not a multiple of the record size {record} "
            f"(dimension {dim}); truncated record at offset "
            f"{raw.size - raw.size % record}"
        )
    records = raw.reshape(-1, record)
    dims = records[:, :4].copy().view("<i4").reshape(-1)
    drift = np.nonzero(dims != dim)[0]
    if drift.size > 0:
        index = int(drift[0])
        raise DatasetFormatError(
            f"{path}: record {index} at offset {index * record} has dimension "
            f"{int(dims[index])}, expected {dim}"
        )
    return records[:, 4:].copy().view(np.dtype(dtype).newbyteorder("<"))


def read_fvecs(path: PathLike) -> np.ndarray:
    """
    Reads an ``.fvecs`` file: every record is a little-endian ``int32`` dimension
    followed by that many ``float32`` components.

    :raises DatasetFormatError: on a truncated file or a record whose dimension
        differs from the first one.
    :return: ``float64`` array of shape ``(n, dim)``.
    """
    return _read_vecs(path, np.float32, "fvecs").astype(np.float64)


def read_bvecs(path: PathLike) -> np.ndarray:
    """
    Reads a ``.bvecs`` file: every record is a little-endian ``int32`` dimension
    followed by that many ``uint8`` components.

    :return: ``float64`` array of shape ``(n, dim)``.
    """
    return _read_vecs(path, np.uint8, "bvecs").astype(np.float64)


def read_csv(path: PathLike) -> np.ndarray:
    """
    Reads comma-separated rows of numbers, one vector per row.

    :return: ``float64`` array of shape ``(n, dim)``.
    """
    rows = []
    with open(path, newline="") as fp:
        for line, row in enumerate(csv.reader(fp), start=1):
            if not row:
                continue
            try:
                rows.append([float(value) for value in row])
            except ValueError as err:
                raise DatasetFormatError(f"{path}: line {line}: {err}") from err
            if len(rows[-1]) != len(rows[0]):
                raise DatasetFormatError(
                    f"{path}: line {line} has {len(rows[-1])} values, expected "
                    f"{len(rows[0])}"
                )
    if not rows:
        raise DatasetFormatError(f"{path}: no data")
    return np.asarray(rows, dtype=np.float64)


def read_words(path: PathLike) -> list[str]:
    """Reads one UTF-8 string per line; empty lines are skipped."""
    try:
        with open(path, encoding="utf-8") as fp:
            words = [line.rstrip("\r\n") for line in fp]
    except UnicodeDecodeError as err:
        raise DatasetFormatError(
            f"{path}: invalid UTF-8 at offset {err.start}"
        ) from err
    return [word for word in words if word]


def load_dataset(
    path: PathLike,
    format: str,
    metric: str,
    normalize: bool = False,
) -> Dataset:
    """
    Loads a :class:`Dataset` from a file.

    :param path: the file.
    :param format: one of ``fvecs``, ``bvecs``, ``csv`` or ``words``.
    :param metric: metric tag, ``edit`` for ``words`` files.
    :param normalize: rescale the vectors to unit norm.
    """
    if format == "fvecs":
        objects = read_fvecs(path)
    elif format == "bvecs":
        objects = read_bvecs(path)
    elif format == "csv":
        objects = read_csv(path)
    elif format == "words":
        objects = read_words(path)
    else:
        raise ValueError(
            f"dataset format '{format}' is not supported. Choose from "
            f"{', '.join(FORMATS)}"
        )
    return Dataset(objects, metric=metric, normalize=normalize)


def write_fvecs(path: PathLike, vectors) -> None:
    """Writes vectors in ``.fvecs`` format."""
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    n, dim = vectors.shape
    records = np.empty((n, dim + 1), dtype="<i4")
    records[:, 0] = dim
    records[:, 1:] = vectors.view("<i4")
    records.tofile(path)


def write_csv(path: PathLike, vectors) -> None:
    """Writes vectors as comma-separated rows."""
    with open(path, "w", newline="") as fp:
        csv.writer(fp).writerows(np.asarray(vectors, dtype=np.float64).tolist())


def write_words(path: PathLike, words: list[str]) -> None:
    """Writes one string per line."""
    with open(path, "w", encoding="utf-8") as fp:
        for word in words:
            fp.write(word + "\n")


def write_graph(graph: Mrpg, path: PathLike) -> None:
    """
    Writes ``graph`` in the binary graph format.

    The little-endian header holds the magic ``TDOD``, the format version, ``n``,
    ``K``, ``K'``, the variant index and the SHA-256 digest of the dataset. Each vertex
    follows with a flags byte (1: pivot, 2: exact list), its degree as ``uint32`` and
    its sorted neighbor ids as ``int32``. Vertices with an exact list append its length
    as ``uint32``, its ids as ``int32`` and its distances as ``float64``.
    """
    checksum = graph.checksum.ljust(32, b"\0")
    with open(path, "wb") as fp:
        fp.write(
            _HEADER.pack(
                GRAPH_MAGIC,
                GRAPH_VERSION,
                graph.n,
                graph.K,
                graph.K_prime,
                VARIANTS.index(graph.variant),
                checksum,
            )
        )
        for p, neighbors in enumerate(graph.adjacency):
            exact = graph.exact_knn.get(p)
            flags = (_PIVOT_FLAG if graph.is_pivot[p] else 0) | (
                _EXACT_FLAG if exact is not None else 0
            )
            fp.write(_VERTEX.pack(flags, len(neighbors)))
            fp.write(np.asarray(neighbors, dtype="<i4").tobytes())
            if exact is not None:
                fp.write(_COUNT.pack(len(exact)))
                fp.write(np.asarray(exact.ids, dtype="<i4").tobytes())
                fp.write(np.asarray(exact.dists, dtype="<f8").tobytes())


class _Reader:
    def __init__(self, path: PathLike, data: bytes):
        self.path = path
        self.data = data
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.data):
            raise DatasetFormatError(
                f"{self.path}: truncated {what} at offset {self.offset}"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout: struct.Struct, what: str) -> tuple:
        return layout.unpack(self.take(layout.size, what))

    def array(self, dtype: str, count: int, what: str) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count, what), dtype=dtype)


def read_graph(path: PathLike) -> Mrpg:
    """
    Reads a graph written by :func:`write_graph`.

    :raises DatasetFormatError: on a wrong magic, an unknown version or variant, a
        truncated file or trailing bytes.
    """
    reader = _Reader(path, Path(path).read_bytes())
    magic, version, n, K, K_prime, variant, checksum = reader.unpack(
        _HEADER, "header"
    )
    if magic != GRAPH_MAGIC:
        raise DatasetFormatError(f"{path}: not a graph file (magic {magic!r})")
    if version != GRAPH_VERSION:
        raise DatasetFormatError(f"{path}: unsupported graph format version {version}")
    if variant >= len(VARIANTS):
        raise DatasetFormatError(f"{path}: unknown graph variant {variant}")

    adjacency = []
    is_pivot = []
    exact_knn = {}
    for p in range(n):
        flags, degree = reader.unpack(_VERTEX, f"vertex {p}")
        neighbors = reader.array("<i4", degree, f"neighbors of vertex {p}").tolist()
        if any(not 0 <= q < n for q in neighbors):
            raise DatasetFormatError(
                f"{path}: vertex {p} has a neighbor id out of range at offset "
                f"{reader.offset - 4 * degree}"
            )
        adjacency.append(neighbors)
        is_pivot.append(bool(flags & _PIVOT_FLAG))
        if flags & _EXACT_FLAG:
            (count,) = reader.unpack(_COUNT, f"exact list length of vertex {p}")
            ids = reader.array("<i4", count, f"exact list of vertex {p}").tolist()
            dists = reader.array("<f8", count, f"exact list of vertex {p}").tolist()
            neighbors = NeighborList(p, max(count, 1))
            neighbors.ids = ids
            neighbors.dists = dists
            exact_knn[p] = neighbors
    if reader.offset != len(reader.data):
        raise DatasetFormatError(
            f"{path}: {len(reader.data) - reader.offset} trailing bytes at offset "
            f"{reader.offset}"
        )

    return Mrpg(
        adjacency,
        K=K,
        K_prime=K_prime,
        variant=VARIANTS[variant],
        is_pivot=is_pivot,
        exact_knn=exact_knn,
        checksum=checksum if any(checksum) else b"",
    )
