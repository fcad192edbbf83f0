import os
from pathlib import Path

import numpy as np
import pytest

from gcnselect.graph import build_graph

ACCEPTANCE_LINES: list[str] = []


def random_graph(n, p, seed):
    """Erdos-Renyi G(n, p) via numpy's default generator (independent of the package RNG)."""
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    keep = rng.random(iu[0].size) < p
    return build_graph(np.column_stack([iu[0][keep], iu[1][keep]]), n)


def dense_adjacency(g):
    a = np.zeros((g.num_nodes, g.num_nodes))
    for u, v in g.edges():
        a[u, v] = a[v, u] = 1.0
    return a


def floyd_warshall(a):
    """All-pairs hop distances from a dense 0/1 adjacency; inf when unreachable."""
    n = a.shape[0]
    d = np.where(a > 0, 1.0, np.inf)
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def brute_force_centrality(g, component_local=False):
    d = floyd_warshall(dense_adjacency(g))
    n = g.num_nodes
    out = np.zeros(n)
    for i in range(n):
        reach = np.isfinite(d[i]) & (d[i] > 0)
        denom = (np.count_nonzero(np.isfinite(d[i])) - 1) if component_local else n - 1
        out[i] = np.sum(1.0 / d[i, reach]) / max(denom, 1)
    return out


@pytest.fixture
def data_root():
    """Root holding cora/, citeseer/, pubmed/ dataset directories, if configured."""
    root = os.environ.get("GCNSELECT_DATA_ROOT")
    return Path(root) if root else None


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
