from .dataset import Dataset, distance_counted
from .io import (
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
from .synthetic import clustered_words, gaussian_mixture

__all__ = [
    "Dataset",
    "clustered_words",
    "distance_counted",
    "gaussian_mixture",
    "load_dataset",
    "read_bvecs",
    "read_csv",
    "read_fvecs",
    "read_graph",
    "read_words",
    "write_csv",
    "write_fvecs",
    "write_graph",
    "write_words",
]
