"""Local reaching centrality on undirected graphs.

For node ``i`` the score is ``(1 / (N - 1)) * sum(1 / d(i, j))`` over every
``j`` reachable from ``i`` with ``j != i``. By default ``N`` is the node count
of the whole graph, so nodes stuck in small components score low.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import Graph, connected_components

UNREACHABLE = -1


@dataclass(frozen=True)
class CentralityScores:
    scores: np.ndarray
    component_local_n: bool = False
    max_radius: int | None = None


def bfs_distances(g: Graph, source: int, max_radius: int | None = None) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes hold ``UNREACHABLE``.

    With ``max_radius`` set, nodes farther than that are reported unreachable.
    """
    if not 0 <= source < g.num_nodes:
        raise IndexError(f"source {source} out of range for {g.num_nodes} nodes")
    dist = np.full(g.num_nodes, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size and (max_radius is None or level < max_radius):
        level += 1
        nbrs = g.neighbors_of(frontier)
        nbrs = nbrs[dist[nbrs] == UNREACHABLE]
        if nbrs.size == 0:
            break
        nbrs = np.unique(nbrs)
        dist[nbrs] = level
        frontier = nbrs
    return dist


def _harmonic_sum(g: Graph, source: int, max_radius: int | None) -> float:
    d = bfs_distances(g, source, max_radius)
    reached = d[d > 0]
    # level counts summed in ascending order keep the result thread-count independent
    counts = np.bincount(reached)
    levels = np.flatnonzero(counts)
    return float(np.sum(counts[levels] / levels))


def local_reaching_centrality(
    g: Graph,
    *,
    component_local_n: bool = False,
    max_radius: int | None = None,
    jobs: int | None = 1,
) -> CentralityScores:
    """One BFS per node. ``jobs=None`` uses every available core."""
    n = g.num_nodes
    if n < 2:
        raise ValueError(f"local reaching centrality needs at least 2 nodes, got {n}")
    if max_radius is not None and max_radius < 1:
        raise ValueError(f"max_radius must be >= 1, got {max_radius}")

    sums = np.zeros(n)

    def work(sources: range) -> None:
        for s in sources:
            sums[s] = _harmonic_sum(g, s, max_radius)

    jobs = jobs or os.cpu_count() or 1
    if jobs == 1:
        work(range(n))
    else:
        step = -(-n // jobs)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(work, [range(a, min(a + step, n)) for a in range(0, n, step)]))

    if component_local_n:
        labeling = connected_components(g)
        sizes = np.bincount(labeling.component_id)[labeling.component_id]
        denom = np.maximum(sizes - 1, 1).astype(np.float64)
    else:
        denom = float(n - 1)
    return CentralityScores(sums / denom, component_local_n, max_radius)
