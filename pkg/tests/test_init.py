import pytest

import torchdod


def test_version_exist():
    _ = torchdod.__version__


@pytest.mark.parametrize("name", torchdod.__all__)
def test_public_names(name):
    assert hasattr(torchdod, name)


def test_errors_keep_builtin_bases():
    assert issubclass(torchdod.ConfigurationError, ValueError)
    assert issubclass(torchdod.ConsistencyError, ValueError)
    assert issubclass(torchdod.DatasetFormatError, OSError)
