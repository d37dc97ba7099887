import pytest
import torch
from torch.testing import assert_close

from torchdod.data import Dataset, distance_counted
from torchdod.metrics import DistanceCounter

DTYPE = torch.float64


def test_scalars_become_vectors():
    ds = Dataset([0, 1, 2, 10], metric="l1")
    assert ds.n == 4
    assert ds.dim == 1
    assert ds.objects.dtype == DTYPE
    assert ds.objects.shape == (4, 1)


def test_strings():
    ds = Dataset(["a", "bb", "ccc"], metric="edit")
    assert ds.n == 3
    assert ds.dim is None
    assert ds[1] == "bb"


def test_empty_dataset():
    with pytest.raises(ValueError, match="a dataset must contain at least one object"):
        Dataset(torch.zeros(0, 3), metric="l2")


def test_invalid_shape():
    match = r"vector objects must have shape \[n, dim\], got \[2, 3, 4\]"
    with pytest.raises(ValueError, match=match):
        Dataset(torch.zeros(2, 3, 4), metric="l2")


def test_normalize():
    ds = Dataset([[3.0, 4.0], [0.0, 2.0]], metric="l2", normalize=True)
    expected = torch.tensor([[0.6, 0.8], [0.0, 1.0]], dtype=DTYPE)
    assert torch.allclose(ds.objects, expected)


def test_normalize_strings():
    with pytest.raises(ValueError, match="`normalize` is only supported for vector"):
        Dataset(["abc"], metric="edit", normalize=True)


def test_distance_counted():
    ds = Dataset([[0.0, 0.0], [3.0, 4.0]], metric="l2")
    counter = DistanceCounter()
    assert counter.value == 0

    first = distance_counted(ds, 0, 1, counter)
    assert counter.value == 1
    second = distance_counted(ds, 0, 1, counter)
    assert counter.value == 2

    assert first == second == ds.distance(0, 1)


def test_batched_distances_match_scalar():
    ds = Dataset(torch.randn(20, 5, dtype=DTYPE), metric="l2")
    counter = DistanceCounter()
    batch = ds.distances(3, list(range(20)), counter)
    assert counter.value == 20
    expected = torch.tensor([ds.distance(3, q) for q in range(20)], dtype=DTYPE)
    assert_close(batch, expected, rtol=1e-12, atol=1e-12)
    assert_close(ds.distances_block(3, 5, 12), batch[5:12], rtol=1e-12, atol=1e-12)


def test_counter_merge():
    total = DistanceCounter(3).merge(DistanceCounter(4), DistanceCounter(5))
    assert total.value == 12


def test_subset():
    ds = Dataset(["a", "bb", "ccc", "dddd"], metric="edit")
    sub = ds.subset([3, 1])
    assert sub.objects == ["dddd", "bb"]
    assert sub.metric is ds.metric


def test_checksum():
    a = Dataset([[0.0, 1.0], [2.0, 3.0]], metric="l2")
    b = Dataset([[0.0, 1.0], [2.0, 3.0]], metric="l2")
    c = Dataset([[0.0, 1.0], [2.0, 3.5]], metric="l2")
    d = Dataset([[0.0, 1.0], [2.0, 3.0]], metric="l1")

    assert len(a.checksum()) == 32
    assert a.checksum() == b.checksum()
    assert a.checksum() != c.checksum()
    assert a.checksum() != d.checksum()
