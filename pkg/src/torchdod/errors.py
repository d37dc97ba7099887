class ConfigurationError(ValueError):
    """Invalid combination of parameters, e.g. VP-tree verification without a tree."""


class DatasetFormatError(OSError):
    """An input file could not be parsed; the message names the file and offset."""


class ConsistencyError(ValueError):
    """A stored graph does not belong to the dataset it is used with."""
