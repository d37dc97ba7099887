"""
Command-line interface: ``torch-dod {build,detect,oracle,bench,gen}``.

Options come from an optional TOML file given with ``--config`` and from flags; flags
take precedence. The file uses the sections ``[dataset]``, ``[build]``, ``[detect]``,
``[bench]``, ``[output]`` and ``[gen]``, for example::

    [dataset]
    path = "sift.fvecs"
    format = "fvecs"
    metric = "l2"

    [build]
    graph = "mrpg"
    K = 10

    [detect]
    r = 320.0
    k = 50
    threads = 4
"""

import argparse
import csv
import json
import logging
import math
import sys
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import torch

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .data import (
    Dataset,
    clustered_words,
    gaussian_mixture,
    load_dataset,
    read_graph,
    write_csv,
    write_fvecs,
    write_graph,
    write_words,
)
from .detectors import (
    DodParams,
    DodResult,
    GraphDetector,
    NestedLoopDetector,
    VpTreeDetector,
    resolve_verify_mode,
)
from .errors import ConfigurationError, ConsistencyError
from .graphs import VARIANTS, BuildParams, Mrpg, build_mrpg
from .lib import VpTree
from .lib.seeding import make_generator
from .oracle import OracleReport, brute_force_outliers

logger = logging.getLogger(__name__)

#: Command-line names of the verification modes.
VERIFY_CHOICES = {"vptree": "vp_tree", "scan": "linear_scan", "auto": "auto"}

#: Graph choices accepted by ``detect`` and ``bench``; ``none`` runs a baseline.
GRAPH_CHOICES = (*VARIANTS, "none")

BUILD_PASSES = (
    "NNDescent+",
    "NNDescent",
    "Connect-SubGraphs",
    "Remove-Detours",
    "Remove-Links",
)

BENCH_COLUMNS = (
    "graph",
    "sampling_rate",
    "n",
    "k",
    "r",
    "threads",
    "connect",
    "detours",
    "build_time",
    "edges",
    "index_bytes",
    "filter_time",
    "verify_time",
    "detect_time",
    "candidate_count",
    "verified",
    "f",
    "t",
    "rho",
    "distance_evals",
)

# (section, key in file) -> RunConfig field
_FILE_KEYS = {
    ("dataset", "path"): "dataset",
    ("dataset", "format"): "format",
    ("dataset", "metric"): "metric",
    ("dataset", "normalize"): "normalize",
    ("build", "graph"): "graph",
    ("build", "K"): "K",
    ("build", "Kprime"): "K_prime",
    ("build", "m"): "m",
    ("build", "repeats"): "repeats",
    ("build", "max_iters"): "max_iters",
    ("build", "seed"): "seed",
    ("build", "connect"): "connect",
    ("build", "detours"): "detours",
    ("detect", "r"): "r",
    ("detect", "k"): "k",
    ("detect", "threads"): "threads",
    ("detect", "verify"): "verify",
    ("bench", "sampling_rates"): "sampling_rates",
    ("bench", "ks"): "ks",
    ("bench", "rs"): "rs",
    ("bench", "threads"): "thread_counts",
    ("bench", "graphs"): "graphs",
    ("output", "out"): "out",
    ("output", "graph"): "graph_file",
    ("gen", "n"): "n",
    ("gen", "dim"): "dim",
    ("gen", "clusters"): "clusters",
    ("gen", "outlier_fraction"): "outlier_fraction",
}


@dataclass
class RunConfig:
    """
    Resolved options of one CLI invocation.

    The graph variant ``mrpg-basic`` always uses exact lists of length ``K``; setting
    ``K_prime`` to another value is an error.
    """

    dataset: Optional[str] = None
    format: str = "fvecs"
    metric: str = "l2"
    normalize: bool = False
    graph: str = "mrpg"
    K: int = 10
    K_prime: Optional[int] = None
    m: Optional[int] = None
    repeats: int = 3
    max_iters: int = 12
    seed: int = 0
    connect: bool = True
    detours: bool = True
    r: Optional[float] = None
    k: Optional[int] = None
    threads: int = 1
    verify: str = "auto"
    out: Optional[str] = None
    graph_file: Optional[str] = None
    sampling_rates: list[float] = field(default_factory=lambda: [1.0])
    ks: list[int] = field(default_factory=list)
    rs: list[float] = field(default_factory=list)
    thread_counts: list[int] = field(default_factory=lambda: [1])
    graphs: list[str] = field(default_factory=lambda: ["mrpg"])
    n: int = 1000
    dim: int = 2
    clusters: int = 5
    outlier_fraction: float = 0.01

    def __post_init__(self):
        for graph in [self.graph, *self.graphs]:
            if graph not in GRAPH_CHOICES:
                raise ConfigurationError(
                    f"graph '{graph}' is not supported. Choose from "
                    f"{', '.join(GRAPH_CHOICES)}"
                )
        if self.verify not in VERIFY_CHOICES:
            raise ConfigurationError(
                f"verification '{self.verify}' is not supported. Choose from "
                f"{', '.join(VERIFY_CHOICES)}"
            )
        if (
            self.graph == "mrpg-basic"
            and self.K_prime is not None
            and self.K_prime != self.K
        ):
            raise ConfigurationError(
                f"graph 'mrpg-basic' uses K' = K = {self.K}, got K' = {self.K_prime}"
            )
        for rate in self.sampling_rates:
            if not 0 < rate <= 1:
                raise ConfigurationError(
                    f"sampling rates must be in (0, 1], got {rate}"
                )

    @classmethod
    def from_sources(
        cls, file_values: dict[str, Any], flag_values: dict[str, Any]
    ) -> "RunConfig":
        """Merges file values and flags (ignoring unset flags); flags win."""
        values = dict(file_values)
        values.update(
            {key: value for key, value in flag_values.items() if value is not None}
        )
        return cls(**values)

    def build_params(self, graph: Optional[str] = None) -> BuildParams:
        graph = self.graph if graph is None else graph
        return BuildParams(
            K=self.K,
            K_prime=self.K if graph == "mrpg-basic" else self.K_prime,
            m=self.m,
            max_iters=self.max_iters,
            repeats=self.repeats,
            seed=self.seed,
            threads=self.threads,
            connect=self.connect,
            detours=self.detours,
        )

    def dod_params(
        self,
        r: Optional[float] = None,
        k: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> DodParams:
        r = self.r if r is None else r
        k = self.k if k is None else k
        if r is None or k is None:
            raise ConfigurationError("detection requires both `r` and `k`")
        return DodParams(
            r=r,
            k=k,
            threads=self.threads if threads is None else threads,
            verify_mode=VERIFY_CHOICES[self.verify],
            seed=self.seed,
        )

    def load_dataset(self) -> Dataset:
        if self.dataset is None:
            raise ConfigurationError(
                "no dataset given, use --dataset or [dataset] path"
            )
        return load_dataset(self.dataset, self.format, self.metric, self.normalize)


def load_config(path: str) -> dict[str, Any]:
    """
    Reads a TOML configuration file into :class:`RunConfig` field values.

    :raises ConfigurationError: on unknown sections or keys.
    """
    with open(path, "rb") as fp:
        try:
            document = tomllib.load(fp)
        except tomllib.TOMLDecodeError as err:
            raise ConfigurationError(f"{path}: {err}") from err

    values = {}
    for section, table in document.items():
        if not isinstance(table, dict):
            raise ConfigurationError(f"{path}: '{section}' must be a section")
        for key, value in table.items():
            name = _FILE_KEYS.get((section, key))
            if name is None:
                raise ConfigurationError(f"{path}: unknown option [{section}] {key}")
            values[name] = value
    return values


def _baseline_detector(dataset: Dataset, config: RunConfig):
    mode, tree = VERIFY_CHOICES[config.verify], None
    if mode == "auto":
        mode, tree = resolve_verify_mode(dataset, mode, None, config.seed)
    if mode == "vp_tree":
        return VpTreeDetector(dataset, tree, seed=config.seed)
    return NestedLoopDetector(dataset)


def _graph_detector(dataset: Dataset, graph: Mrpg, config: RunConfig) -> GraphDetector:
    tree = None
    if config.verify == "vptree":
        tree = VpTree(dataset, seed=config.seed)
    return GraphDetector(dataset, graph, tree)


def _print_timings(graph: Mrpg) -> None:
    print(f"{'pass':<20} {'time [s]':>10}")
    for name in BUILD_PASSES:
        if name in graph.stats.timings:
            print(f"{name:<20} {graph.stats.timings[name]:>10.3f}")
    print(f"{'total':<20} {graph.stats.total_time:>10.3f}")
    degrees = graph.degree_stats()
    print(
        f"{graph.variant}: {graph.n} vertices, {graph.num_edges} edges, "
        f"{len(graph.pivots)} pivots, {len(graph.exact_knn)} exact lists, "
        f"mean degree {degrees['mean']:.1f}, {graph.nbytes() / 2**20:.2f} MB"
    )


def cmd_build(config: RunConfig) -> Mrpg:
    """Builds a graph and writes it to ``graph_file`` (or ``out``)."""
    if config.graph == "none":
        raise ConfigurationError("`build` needs a graph variant, not 'none'")
    path = config.graph_file or config.out
    if path is None:
        raise ConfigurationError("no output given, use --graph-file or --out")

    dataset = config.load_dataset()
    graph = build_mrpg(dataset, config.build_params(), variant=config.graph)
    write_graph(graph, path)
    _print_timings(graph)
    logger.info("graph written to %s", path)
    return graph


def cmd_detect(config: RunConfig) -> DodResult:
    """
    Finds the outliers and writes their ids (one per line) to ``out``, or to the
    standard output, along with a JSON stats record ``<out>.stats.json``.

    The graph is read from ``graph_file`` when given, built in memory otherwise.
    """
    dataset = config.load_dataset()
    params = config.dod_params()

    if config.graph == "none":
        detector = _baseline_detector(dataset, config)
    else:
        if config.graph_file is not None:
            graph = read_graph(config.graph_file)
            if graph.n != dataset.n or graph.checksum != dataset.checksum():
                raise ConsistencyError(
                    f"graph file {config.graph_file} was built over a different "
                    f"dataset ({graph.n} vertices, dataset has {dataset.n} objects)"
                )
        else:
            graph = build_mrpg(dataset, config.build_params(), variant=config.graph)
        detector = _graph_detector(dataset, graph, config)

    result = detector.detect(params)
    lines = "".join(f"{p}\n" for p in result.outliers)
    stats = result.as_dict()
    if config.out is None:
        sys.stdout.write(lines)
    else:
        Path(config.out).write_text(lines)
        with open(f"{config.out}.stats.json", "w") as fp:
            json.dump(stats, fp, indent=2, sort_keys=True)
            fp.write("\n")
    logger.info(
        "t=%d f=%d filter %.3fs verify %.3fs rho %.2f distance evaluations %d",
        result.t,
        result.f,
        result.filter_time,
        result.verify_time,
        result.rho,
        result.distance_evals,
    )
    return result


def cmd_oracle(config: RunConfig) -> OracleReport:
    """Writes the brute-force neighbor counts as CSV to ``out`` or standard output."""
    dataset = config.load_dataset()
    params = config.dod_params()
    report = brute_force_outliers(dataset, params.r, params.k)

    rows = [
        (p, count, int(p in report.outliers))
        for p, count in enumerate(report.neighbor_counts)
    ]
    if config.out is None:
        writer = csv.writer(sys.stdout)
        writer.writerow(("id", "neighbor_count", "outlier"))
        writer.writerows(rows)
    else:
        with open(config.out, "w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(("id", "neighbor_count", "outlier"))
            writer.writerows(rows)
    logger.info("%d outliers in %.3fs", len(report.outliers), report.runtime)
    return report


def _sample(dataset: Dataset, rate: float, seed: int) -> Dataset:
    if rate == 1:
        return dataset
    size = max(math.ceil(rate * dataset.n), 2)
    ids = torch.randperm(dataset.n, generator=make_generator(seed))[:size]
    return dataset.subset(torch.sort(ids).values)


def cmd_bench(config: RunConfig) -> list[dict[str, Any]]:
    """
    Runs every combination of sampling rate, graph, ``k``, ``r`` and thread count and
    writes one CSV row per combination to ``out`` (or the standard output). An empty
    axis gives a header-only table.
    """
    rows = []
    cells = (
        config.sampling_rates
        and config.graphs
        and config.ks
        and config.rs
        and config.thread_counts
    )
    if cells:
        full = config.load_dataset()
        for rate in config.sampling_rates:
            dataset = _sample(full, rate, config.seed)
            for graph_name in config.graphs:
                tick = time.perf_counter()
                if graph_name == "none":
                    detector = _baseline_detector(dataset, config)
                    edges = index_bytes = 0
                else:
                    graph = build_mrpg(
                        dataset, config.build_params(graph_name), variant=graph_name
                    )
                    detector = _graph_detector(dataset, graph, config)
                    edges = graph.num_edges
                    index_bytes = graph.nbytes()
                build_time = time.perf_counter() - tick

                for k in config.ks:
                    for r in config.rs:
                        for threads in config.thread_counts:
                            result = detector.detect(config.dod_params(r, k, threads))
                            rows.append(
                                {
                                    "graph": graph_name,
                                    "sampling_rate": rate,
                                    "n": dataset.n,
                                    "k": k,
                                    "r": r,
                                    "threads": threads,
                                    "connect": config.connect,
                                    "detours": config.detours,
                                    "build_time": build_time,
                                    "edges": edges,
                                    "index_bytes": index_bytes,
                                    "filter_time": result.filter_time,
                                    "verify_time": result.verify_time,
                                    "detect_time": result.total_time,
                                    "candidate_count": result.candidate_count,
                                    "verified": result.verified,
                                    "f": result.f,
                                    "t": result.t,
                                    "rho": result.rho,
                                    "distance_evals": result.distance_evals,
                                }
                            )
                            logger.info(
                                "%s n=%d k=%d r=%g threads=%d: %.3fs",
                                graph_name,
                                dataset.n,
                                k,
                                r,
                                threads,
                                result.total_time,
                            )

    if config.out is None:
        _write_rows(sys.stdout, rows)
    else:
        with open(config.out, "w", newline="") as fp:
            _write_rows(fp, rows)
    return rows


def _write_rows(fp, rows: list[dict[str, Any]]) -> None:
    writer = csv.DictWriter(fp, fieldnames=BENCH_COLUMNS)
    writer.writeheader()
    writer.writerows(rows)


def cmd_gen(config: RunConfig) -> list[int]:
    """
    Writes a synthetic dataset to ``out`` and the ids of the planted outliers to
    ``<out>.planted``. Strings are generated for the ``edit`` metric, vectors
    otherwise.
    """
    if config.out is None:
        raise ConfigurationError("no output given, use --out")
    if config.metric == "edit":
        words, planted = clustered_words(
            config.n,
            n_clusters=config.clusters,
            outlier_fraction=config.outlier_fraction,
            seed=config.seed,
        )
        write_words(config.out, words)
    else:
        points, planted_ids = gaussian_mixture(
            config.n,
            dim=config.dim,
            n_clusters=config.clusters,
            outlier_fraction=config.outlier_fraction,
            seed=config.seed,
        )
        planted = planted_ids.tolist()
        if config.format == "fvecs":
            write_fvecs(config.out, points.numpy())
        elif config.format == "csv":
            write_csv(config.out, points.numpy())
        else:
            raise ConfigurationError(
                f"cannot generate vectors in '{config.format}' format, use fvecs or csv"
            )
    Path(f"{config.out}.planted").write_text("".join(f"{p}\n" for p in planted))
    logger.info(
        "wrote %d objects (%d planted) to %s", config.n, len(planted), config.out
    )
    return planted


COMMANDS = {
    "build": cmd_build,
    "detect": cmd_detect,
    "oracle": cmd_oracle,
    "bench": cmd_bench,
    "gen": cmd_gen,
}


def build_parser() -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--config", help="TOML configuration file")
    options.add_argument("-v", "--verbose", action="store_true", help="debug output")
    options.add_argument("-q", "--quiet", action="store_true", help="warnings only")

    group = options.add_argument_group("dataset")
    group.add_argument("--dataset", help="input file")
    group.add_argument("--format", choices=("fvecs", "bvecs", "csv", "words"))
    group.add_argument("--metric", choices=("l1", "l2", "l4", "angular", "edit"))
    group.add_argument(
        "--normalize", action="store_true", default=None, help="rescale to unit norm"
    )

    group = options.add_argument_group("graph")
    group.add_argument("--graph", choices=GRAPH_CHOICES)
    group.add_argument("--K", type=int, help="approximate neighbors per object")
    group.add_argument("--Kprime", dest="K_prime", type=int, help="exact list length")
    group.add_argument("--m", type=int, help="number of exact lists")
    group.add_argument("--repeats", type=int, help="VP-trees used for initialization")
    group.add_argument("--max-iters", dest="max_iters", type=int)
    group.add_argument("--seed", type=int)
    group.add_argument(
        "--no-connect",
        dest="connect",
        action="store_false",
        default=None,
        help="skip linking the connected components",
    )
    group.add_argument(
        "--no-detours",
        dest="detours",
        action="store_false",
        default=None,
        help="skip adding detour shortcuts",
    )
    group.add_argument("--graph-file", dest="graph_file", help="binary graph file")

    group = options.add_argument_group("detection")
    group.add_argument("--r", type=float, help="neighbor radius")
    group.add_argument("--k", type=int, help="neighbor count threshold")
    group.add_argument("--threads", type=int)
    group.add_argument("--verify", choices=tuple(VERIFY_CHOICES))
    group.add_argument("--out", help="output file")

    group = options.add_argument_group("bench")
    group.add_argument("--sampling-rates", dest="sampling_rates", type=float, nargs="*")
    group.add_argument("--ks", type=int, nargs="*")
    group.add_argument("--rs", type=float, nargs="*")
    group.add_argument("--thread-counts", dest="thread_counts", type=int, nargs="*")
    group.add_argument("--graphs", choices=GRAPH_CHOICES, nargs="*")

    group = options.add_argument_group("gen")
    group.add_argument("--n", type=int, help="number of objects")
    group.add_argument("--dim", type=int)
    group.add_argument("--clusters", type=int)
    group.add_argument("--outlier-fraction", dest="outlier_fraction", type=float)

    parser = argparse.ArgumentParser(
        prog="torch-dod",
        description="Exact distance-based outlier detection with proximity graphs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        commands.add_parser(
            name, parents=[options], help=command.__doc__.strip().splitlines()[0]
        )
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config(args.config) if args.config else {}
    names = {f.name for f in fields(RunConfig)}
    flag_values = {key: value for key, value in vars(args).items() if key in names}
    return RunConfig.from_sources(file_values, flag_values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of ``torch-dod``.

    :return: the exit code: 0 on success, 2 for a configuration error, 3 for an I/O or
        format error and 4 when a graph does not match its dataset.
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")

    try:
        COMMANDS[args.command](_run_config(args))
    except ConsistencyError as err:
        logger.error("%s", err)
        return 4
    except (ConfigurationError, ValueError, TypeError) as err:
        logger.error("%s", err)
        return 2
    except OSError as err:
        logger.error("%s", err)
        return 3
    return 0
