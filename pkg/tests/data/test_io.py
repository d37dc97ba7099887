import sys
from pathlib import Path

import numpy as np
import pytest

from torchdod.data import (
    Dataset,
    load_dataset,
    read_bvecs,
    read_csv,
    read_fvecs,
    read_graph,
    read_words,
    write_csv,
    write_fvecs,
    write_graph,
    write_words,
)
from torchdod.errors import DatasetFormatError
from torchdod.graphs import BuildParams, Mrpg, build_mrpg

sys.path.append(str(Path(__file__).parents[1]))
from helpers import random_dataset

VECTORS = np.array([[0.5, -1.0, 2.25], [3.0, 0.0, -0.125]])


def fvecs_record(dim, values):
    return np.int32(dim).tobytes() + np.asarray(values, dtype="<f4").tobytes()


def test_fvecs(tmp_path):
    path = tmp_path / "points.fvecs"
    write_fvecs(path, VECTORS)
    assert path.stat().st_size == 2 * (4 + 3 * 4)

    vectors = read_fvecs(path)
    assert vectors.dtype == np.float64
    np.testing.assert_array_equal(vectors, VECTORS)


def test_bvecs(tmp_path):
    path = tmp_path / "points.bvecs"
    header = np.int32(2).tobytes()
    path.write_bytes(header + bytes([1, 255]) + header + bytes([0, 7]))
    np.testing.assert_array_equal(read_bvecs(path), [[1.0, 255.0], [0.0, 7.0]])


def test_fvecs_dimension_drift(tmp_path):
    path = tmp_path / "drift.fvecs"
    # same record size, but the second header announces three components
    path.write_bytes(fvecs_record(2, [1.0, 2.0]) + fvecs_record(3, [3.0, 4.0]))
    match = "record 1 at offset 12 has dimension 3, expected 2"
    with pytest.raises(DatasetFormatError, match=match):
        read_fvecs(path)


def test_fvecs_truncated(tmp_path):
    path = tmp_path / "truncated.fvecs"
    path.write_bytes(fvecs_record(2, [1.0, 2.0]) + fvecs_record(2, [3.0, 4.0])[:6])
    with pytest.raises(DatasetFormatError, match="truncated record at offset 12"):
        read_fvecs(path)


def test_fvecs_bad_header(tmp_path):
    path = tmp_path / "tiny.fvecs"
    path.write_bytes(b"\1\0")
    with pytest.raises(DatasetFormatError, match="file too small for a fvecs record"):
        read_fvecs(path)

    path.write_bytes(fvecs_record(0, []))
    with pytest.raises(DatasetFormatError, match="invalid dimension 0 at offset 0"):
        read_fvecs(path)


def test_format_error_is_os_error(tmp_path):
    path = tmp_path / "tiny.fvecs"
    path.write_bytes(b"")
    with pytest.raises(OSError, match="too small"):
        read_fvecs(path)


def test_csv(tmp_path):
    path = tmp_path / "points.csv"
    write_csv(path, VECTORS)
    np.testing.assert_array_equal(read_csv(path), VECTORS)


def test_csv_errors(tmp_path):
    path = tmp_path / "points.csv"
    path.write_text("1,2\n3,x\n")
    with pytest.raises(DatasetFormatError, match="line 2"):
        read_csv(path)

    path.write_text("1,2\n3,4,5\n")
    with pytest.raises(DatasetFormatError, match="line 2 has 3 values, expected 2"):
        read_csv(path)

    path.write_text("\n")
    with pytest.raises(DatasetFormatError, match="no data"):
        read_csv(path)


def test_words(tmp_path):
    path = tmp_path / "words.txt"
    write_words(path, ["kitten", "sitting", "naïve"])
    assert read_words(path) == ["kitten", "sitting", "naïve"]

    path.write_bytes(b"kitten\n\nsitting\r\n")
    assert read_words(path) == ["kitten", "sitting"]


def test_words_invalid_utf8(tmp_path):
    path = tmp_path / "words.txt"
    path.write_bytes(b"abc\n\xff\n")
    with pytest.raises(DatasetFormatError, match="invalid UTF-8 at offset"):
        read_words(path)


@pytest.mark.parametrize("format", ["fvecs", "csv"])
def test_load_dataset(tmp_path, format):
    path = tmp_path / f"points.{format}"
    (write_fvecs if format == "fvecs" else write_csv)(path, VECTORS)
    ds = load_dataset(path, format, "l2")
    assert (ds.n, ds.dim) == (2, 3)
    assert ds.checksum() == Dataset(VECTORS, metric="l2").checksum()

    normalized = load_dataset(path, format, "l2", normalize=True)
    np.testing.assert_allclose(np.linalg.norm(normalized.objects.numpy(), axis=1), 1.0)


def test_load_words(tmp_path):
    path = tmp_path / "words.txt"
    write_words(path, ["a", "ab"])
    ds = load_dataset(path, "words", "edit")
    assert ds.distance(0, 1) == 1.0


def test_load_unknown_format(tmp_path):
    with pytest.raises(ValueError, match="dataset format 'hdf5' is not supported"):
        load_dataset(tmp_path / "points.h5", "hdf5", "l2")


@pytest.mark.parametrize("variant", ["mrpg", "kgraph"])
def test_graph_roundtrip(tmp_path, variant):
    ds = random_dataset("l2", n=100)
    graph = build_mrpg(ds, BuildParams(K=4), variant=variant)
    path = tmp_path / "graph.bin"
    write_graph(graph, path)
    loaded = read_graph(path)

    assert loaded.adjacency == graph.adjacency
    assert loaded.is_pivot == graph.is_pivot
    assert loaded.exact_knn == graph.exact_knn
    assert (loaded.K, loaded.K_prime) == (graph.K, graph.K_prime)
    assert loaded.variant == variant
    assert loaded.checksum == ds.checksum()


def test_graph_without_checksum(tmp_path):
    graph = Mrpg([[1], [0], []], K=1, K_prime=1, is_pivot=[True, False, False])
    path = tmp_path / "graph.bin"
    write_graph(graph, path)
    loaded = read_graph(path)
    assert loaded.checksum == b""
    assert loaded.adjacency == [[1], [0], []]
    assert loaded.pivots == [0]


def write_small_graph(path):
    write_graph(Mrpg([[1], [0]], K=1, K_prime=1), path)
    return path.read_bytes()


def test_graph_bad_magic(tmp_path):
    path = tmp_path / "graph.bin"
    data = write_small_graph(path)
    path.write_bytes(b"NOPE" + data[4:])
    with pytest.raises(DatasetFormatError, match="not a graph file"):
        read_graph(path)


def test_graph_bad_version(tmp_path):
    path = tmp_path / "graph.bin"
    data = write_small_graph(path)
    path.write_bytes(data[:4] + b"\x07\x00" + data[6:])
    with pytest.raises(DatasetFormatError, match="unsupported graph format version 7"):
        read_graph(path)


def test_graph_truncated(tmp_path):
    path = tmp_path / "graph.bin"
    data = write_small_graph(path)
    path.write_bytes(data[:-2])
    with pytest.raises(DatasetFormatError, match="truncated neighbors of vertex 1"):
        read_graph(path)

    path.write_bytes(data[:20])
    with pytest.raises(DatasetFormatError, match="truncated header at offset 0"):
        read_graph(path)


def test_graph_trailing_bytes(tmp_path):
    path = tmp_path / "graph.bin"
    data = write_small_graph(path)
    path.write_bytes(data + b"\0")
    with pytest.raises(DatasetFormatError, match="1 trailing bytes"):
        read_graph(path)
