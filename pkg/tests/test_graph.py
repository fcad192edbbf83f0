import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcnselect.errors import DataError
from gcnselect.graph import (
    SparseMatrix,
    build_graph,
    connected_components,
    normalized_adjacency,
    normalized_laplacian,
    spmm,
)

from conftest import dense_adjacency, random_graph


def test_build_graph_dedups_and_symmetrizes():
    g = build_graph([(0, 1), (1, 0), (1, 2)], 3)
    assert g.num_edges == 2
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.neighbors(1).tolist() == [0, 2]


def test_build_graph_empty():
    g = build_graph([], 2)
    assert g.num_nodes == 2 and g.num_edges == 0
    assert g.degrees.tolist() == [0, 0]


def test_build_graph_drops_self_loops():
    g = build_graph([(0, 0), (0, 1), (1, 1)], 2)
    assert g.num_edges == 1


def test_build_graph_reports_bad_edge():
    with pytest.raises(DataError, match=r"edge #1 \(2, 5\)"):
        build_graph([(0, 1), (2, 5)], 3)
    with pytest.raises(DataError):
        build_graph([(-1, 0)], 3)


edge_lists = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=40)
    )
)


@given(edge_lists)
def test_graph_invariants(case):
    n, edges = case
    g = build_graph(edges, n)
    assert np.all(np.diff(g.row_offsets) >= 0)
    for i in range(n):
        nb = g.neighbors(i)
        assert np.all(np.diff(nb) > 0)  # sorted, no duplicates
        assert i not in nb
        for j in nb:
            assert i in g.neighbors(j)
    assert g.degrees.sum() == 2 * g.num_edges
    expected = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    assert {tuple(e) for e in g.edges().tolist()} == expected


def test_graph_arrays_are_read_only():
    g = build_graph([(0, 1)], 2)
    with pytest.raises(ValueError):
        g.col_indices[0] = 1


def test_components_examples():
    assert connected_components(build_graph([], 2)).num_components == 2
    lab = connected_components(build_graph([(0, 1), (3, 4)], 5))
    assert lab.num_components == 3
    assert lab.component_id.tolist() == [0, 0, 1, 2, 2]


@pytest.mark.parametrize("seed", range(10))
def test_components_invariant_under_relabeling(seed):
    g = random_graph(25, 0.06, seed)
    perm = np.random.default_rng(seed).permutation(25)
    a = connected_components(g)
    b = connected_components(g.permuted(perm))
    assert a.num_components == b.num_components
    # same partition: node i in g and perm[i] in the permuted graph share a block structure
    for u, v in g.edges():
        assert b.component_id[perm[u]] == b.component_id[perm[v]]
    sizes_a = sorted(np.bincount(a.component_id).tolist())
    sizes_b = sorted(np.bincount(b.component_id).tolist())
    assert sizes_a == sizes_b


def test_normalized_adjacency_examples():
    assert np.array_equal(normalized_adjacency(build_graph([(0, 1)], 2)).to_dense(), np.full((2, 2), 0.5))
    assert normalized_adjacency(build_graph([], 1)).to_dense().tolist() == [[1.0]]
    k3 = normalized_adjacency(build_graph([(0, 1), (1, 2), (0, 2)], 3)).to_dense()
    assert np.allclose(k3, 1 / 3, rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_normalized_adjacency_properties(seed):
    g = random_graph(30, 0.1, seed)
    m = normalized_adjacency(g).to_dense()
    assert np.array_equal(m, m.T)
    assert np.all(m.sum(axis=1) > 0)
    a = dense_adjacency(g) + np.eye(30)
    d = a.sum(axis=1)
    assert np.allclose(m, a / np.sqrt(np.outer(d, d)), rtol=0, atol=1e-15)


def test_normalized_laplacian_examples():
    assert normalized_laplacian(build_graph([(0, 1)], 2)).to_dense().tolist() == [[1.0, -1.0], [-1.0, 1.0]]
    lap = normalized_laplacian(build_graph([(0, 1)], 3)).to_dense()
    assert np.all(lap[2] == 0) and np.all(lap[:, 2] == 0)


@pytest.mark.parametrize("seed", range(5))
def test_laplacian_equals_identity_minus_normalized_adjacency(seed):
    g = random_graph(30, 0.08, seed)
    a = dense_adjacency(g)
    d = a.sum(axis=1)
    support = d > 0
    inv = np.zeros_like(d)
    inv[support] = 1 / np.sqrt(d[support])
    expected = np.diag(support.astype(float)) - inv[:, None] * a * inv[None, :]
    assert np.allclose(normalized_laplacian(g).to_dense(), expected, rtol=0, atol=1e-15)


def test_spmm_examples():
    x = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(spmm(SparseMatrix.identity(4), x), x)
    m = normalized_adjacency(build_graph([(0, 1)], 2))
    assert spmm(m, np.array([[1.0], [3.0]])).tolist() == [[2.0], [2.0]]


def test_spmm_matches_dense_product():
    rng = np.random.default_rng(3)
    dense = rng.random((20, 20)) * (rng.random((20, 20)) < 0.2)
    rows, cols = np.nonzero(dense)
    m = SparseMatrix.from_coo(rows, cols, dense[rows, cols], (20, 20))
    x = rng.standard_normal((20, 5))
    assert np.max(np.abs(spmm(m, x) - dense @ x)) < 1e-12


def test_spmm_rejects_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        spmm(SparseMatrix.identity(3), np.ones((4, 2)))


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_degree_sum(seed):
    g = random_graph(15, 0.3, seed)
    assert g.degrees.sum() == 2 * g.num_edges
