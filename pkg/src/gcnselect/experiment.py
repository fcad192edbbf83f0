"""Experiment pipelines behind the CLI: spectrum table, fixed-rate runs, sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .centrality import local_reaching_centrality
from .data_io import DatasetBundle, row_normalize_features
from .graph import SparseMatrix, connected_components, normalized_adjacency, normalized_laplacian
from .selection import Policy, budget_for_rate, default_val_size, make_split, select_train_nodes
from . import spectral
from .spectral import check_trace, eigenvalues_symmetric, spectrum_stats
from .trainer import TrainConfig, train

log = logging.getLogger(__name__)

RESULT_HEADER = ["dataset", "policy", "rate", "seed", "accuracy", "loss", "stop_best", "stop_halt"]
SPECTRUM_HEADER = [
    "dataset", "num_nodes", "num_components", "zero_eigenvalues", "min", "median", "avg", "std", "max",
]


class PipelineError(Exception):
    """A stage of the pipeline failed; ``cause`` is the original exception."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class _stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, Exception):
            raise PipelineError(self.name, exc) from exc
        return False


def fmt(value) -> str:
    """Stable CSV cell formatting: 6 significant digits for reals."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    return str(value)


@dataclass
class ResultRow:
    dataset: str
    policy: str
    rate: float
    seed: int | str
    accuracy: float
    loss: float
    stop_best: float
    stop_halt: float
    status: str = "ok"

    def cells(self, with_status: bool = False) -> list[str]:
        out = [
            self.dataset,
            self.policy,
            fmt(self.rate),
            str(self.seed),
            fmt(self.accuracy),
            fmt(self.loss),
            fmt(self.stop_best),
            fmt(self.stop_halt),
        ]
        if with_status:
            out.append(self.status)
        return out


def rows_to_csv(rows: Iterable[ResultRow], with_status: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER + (["status"] if with_status else []))
    for r in rows:
        w.writerow(r.cells(with_status))
    return buf.getvalue()


def mean_row(rows: Sequence[ResultRow]) -> ResultRow:
    ok = [r for r in rows if r.status == "ok"]
    first = rows[0]

    def avg(attr: str) -> float:
        vals = [getattr(r, attr) for r in ok]
        return float(np.mean(vals)) if vals else math.nan

    return ResultRow(
        first.dataset, first.policy, first.rate, "mean",
        avg("accuracy"), avg("loss"), avg("stop_best"), avg("stop_halt"),
    )


@dataclass
class Prepared:
    """Per-dataset inputs shared by every cell of an experiment."""

    bundle: DatasetBundle
    features: np.ndarray
    a_hat: SparseMatrix
    scores: np.ndarray | None = None


@dataclass(frozen=True)
class RunOptions:
    train: TrainConfig = field(default_factory=TrainConfig)
    stratify: bool = False
    val_size: int | None = None
    component_local_n: bool = False
    max_radius: int | None = None
    jobs: int | None = None


def prepare(bundle: DatasetBundle, policies: Iterable[Policy], opts: RunOptions) -> Prepared:
    with _stage("normalize"):
        features = row_normalize_features(bundle.features)
        a_hat = normalized_adjacency(bundle.graph)
    prepared = Prepared(bundle, features, a_hat)
    if any(p.needs_centrality for p in policies):
        with _stage("centrality"):
            prepared.scores = local_reaching_centrality(
                bundle.graph,
                component_local_n=opts.component_local_n,
                max_radius=opts.max_radius,
                jobs=opts.jobs,
            ).scores
    return prepared


def run_cell(prep: Prepared, policy: Policy, rate: float, seed: int, opts: RunOptions) -> ResultRow:
    """select -> split -> train -> evaluate for one (policy, rate, seed)."""
    bundle = prep.bundle
    n = bundle.graph.num_nodes
    with _stage("select"):
        budget = budget_for_rate(rate, n)
        train_nodes = select_train_nodes(
            prep.scores, bundle.labels, policy, budget, seed, stratify=opts.stratify
        )
    with _stage("split"):
        val_size = opts.val_size if opts.val_size is not None else default_val_size(n)
        val_size = min(val_size, n - train_nodes.size)
        split = make_split(n, train_nodes, val_size, seed)
    with _stage("train"):
        result = train(
            bundle.graph, prep.features, bundle.labels, split,
            replace(opts.train, seed=seed), a_hat=prep.a_hat,
        )
    return ResultRow(
        bundle.name, policy.value, rate, seed,
        result.test_accuracy, result.test_loss, result.stop_epoch, result.halt_epoch,
    )


def _pool_map(fn, items: list, jobs: int | None) -> list:
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def run_fixed(
    bundle: DatasetBundle, policy: Policy, rate: float, seeds: Sequence[int], opts: RunOptions
) -> list[ResultRow]:
    """One row per seed followed by the mean row."""
    prep = prepare(bundle, [policy], opts)
    rows = _pool_map(lambda s: run_cell(prep, policy, rate, s, opts), list(seeds), opts.jobs)
    return rows + [mean_row(rows)]


def run_sweep(
    bundle: DatasetBundle,
    policies: Sequence[Policy],
    rates: Sequence[float],
    seeds: Sequence[int],
    opts: RunOptions,
) -> list[ResultRow]:
    """Full grid; a failing cell becomes a row with ``status`` set and NaN metrics."""
    prep = prepare(bundle, policies, opts)
    cells = sorted(
        {(p.value, float(r), int(s)) for p in policies for r in rates for s in seeds}
    )

    def one(cell) -> ResultRow:
        name, rate, seed = cell
        try:
            return run_cell(prep, Policy(name), rate, seed, opts)
        except PipelineError as exc:
            log.warning("cell %s failed: %s", cell, exc)
            nan = math.nan
            return ResultRow(bundle.name, name, rate, seed, nan, nan, nan, nan, status=f"error: {exc}")

    return _pool_map(one, cells, opts.jobs)


def sweep_means(rows: Sequence[ResultRow]) -> dict[str, list[tuple[float, float]]]:
    """``{policy: [(rate, mean accuracy), ...]}`` over successful rows."""
    grouped: dict[tuple[str, float], list[float]] = {}
    for r in rows:
        if r.status == "ok" and not math.isnan(r.accuracy):
            grouped.setdefault((r.policy, r.rate), []).append(r.accuracy)
    series: dict[str, list[tuple[float, float]]] = {r.policy: [] for r in rows}
    for (policy, rate), accs in sorted(grouped.items()):
        series[policy].append((rate, float(np.mean(accs))))
    return series


def spectrum_row(bundle: DatasetBundle, *, allow_large: bool = False, cap: int | None = None) -> dict:
    if cap is None:
        cap = spectral.DENSE_CAP
    with _stage("laplacian"):
        lap = normalized_laplacian(bundle.graph)
    with _stage("eigensolve"):
        spectrum = eigenvalues_symmetric(lap, cap=cap, allow_large=allow_large)
        check_trace(lap, spectrum)
    stats = spectrum_stats(spectrum)
    return {
        "dataset": bundle.name,
        "num_nodes": bundle.graph.num_nodes,
        "num_components": connected_components(bundle.graph).num_components,
        "zero_eigenvalues": spectrum.count_near_zero(),
        "min": stats.min,
        "median": stats.median,
        "avg": stats.avg,
        "std": stats.std,
        "max": stats.max,
    }


def spectrum_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_HEADER)
    for r in rows:
        w.writerow([fmt(r[k]) for k in SPECTRUM_HEADER])
    return buf.getvalue()
