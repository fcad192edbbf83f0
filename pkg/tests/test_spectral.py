import numpy as np
import pytest

from gcnselect.errors import SpectrumCapError
from gcnselect.graph import SparseMatrix, build_graph, connected_components, normalized_laplacian
from gcnselect.spectral import (
    SpectrumResult,
    check_trace,
    eigenvalues_symmetric,
    spectrum_stats,
)

from conftest import random_graph


def char_poly_roots_3x3(m):
    """Eigenvalues of a 3x3 matrix from its characteristic polynomial
    -l^3 + tr l^2 - (sum of principal 2x2 minors) l + det."""
    tr = np.trace(m)
    minors = sum(
        m[i, i] * m[j, j] - m[i, j] * m[j, i] for i, j in ((0, 1), (0, 2), (1, 2))
    )
    det = np.linalg.det(m)
    return np.sort(np.roots([1.0, -tr, minors, -det]).real)


def test_single_edge_spectrum():
    s = eigenvalues_symmetric(normalized_laplacian(build_graph([(0, 1)], 2)))
    assert np.allclose(s.eigenvalues, [0.0, 2.0], atol=1e-14)


def test_triangle_spectrum_matches_characteristic_polynomial():
    lap = normalized_laplacian(build_graph([(0, 1), (1, 2), (0, 2)], 3))
    oracle = char_poly_roots_3x3(lap.to_dense())
    assert np.allclose(oracle, [0.0, 1.5, 1.5], atol=1e-7)  # double root: np.roots loses ~sqrt(eps)
    got = eigenvalues_symmetric(lap).eigenvalues
    assert np.allclose(got, oracle, atol=1e-7)
    assert np.allclose(got, [0.0, 1.5, 1.5], atol=1e-14)


def test_eigenvector_residuals():
    g = random_graph(40, 0.1, 1)
    lap = normalized_laplacian(g)
    s = eigenvalues_symmetric(lap, want_vectors=True)
    dense = lap.to_dense()
    for k in range(40):
        x = s.eigenvectors[:, k]
        assert np.max(np.abs(dense @ x - s.eigenvalues[k] * x)) < 1e-8
    assert np.all(np.diff(s.eigenvalues) >= 0)


def test_rejects_asymmetric():
    m = SparseMatrix.from_coo(np.array([0]), np.array([1]), np.array([1.0]), (2, 2))
    with pytest.raises(ValueError, match="not symmetric"):
        eigenvalues_symmetric(m)


def test_cap_guard():
    lap = normalized_laplacian(random_graph(12, 0.3, 0))
    with pytest.raises(SpectrumCapError, match="spectrum cap exceeded.*--allow-large"):
        eigenvalues_symmetric(lap, cap=10)
    assert eigenvalues_symmetric(lap, cap=10, allow_large=True).eigenvalues.size == 12


@pytest.mark.parametrize("seed", range(20))
def test_bounds_trace_and_zero_multiplicity(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(5, 40))
    g = random_graph(n, float(rng.uniform(0.02, 0.2)), seed)
    lap = normalized_laplacian(g)
    s = eigenvalues_symmetric(lap)
    assert s.eigenvalues.min() >= -1e-5 and s.eigenvalues.max() <= 2 + 1e-5
    check_trace(lap, s)
    assert s.count_near_zero() == connected_components(g).num_components


@pytest.mark.parametrize("seed", range(3))
def test_spectrum_permutation_invariant(seed):
    g = random_graph(30, 0.12, seed)
    perm = np.random.default_rng(seed).permutation(30)
    a = eigenvalues_symmetric(normalized_laplacian(g)).eigenvalues
    b = eigenvalues_symmetric(normalized_laplacian(g.permuted(perm))).eigenvalues
    assert np.allclose(a, b, atol=1e-12)


def test_stats_two_values():
    st = spectrum_stats(SpectrumResult(np.array([0.0, 2.0])))
    assert (st.min, st.median, st.avg, st.std, st.max) == (0.0, 1.0, 1.0, 1.0, 2.0)


def test_stats_odd_length_median_and_population_std():
    st = spectrum_stats(SpectrumResult(np.array([3.0, 0.0, 1.0])))
    assert st.median == 1.0
    assert st.std == pytest.approx(np.sqrt(((0 - 4 / 3) ** 2 + (1 - 4 / 3) ** 2 + (3 - 4 / 3) ** 2) / 3))


def test_stats_empty():
    with pytest.raises(ValueError):
        spectrum_stats(SpectrumResult(np.empty(0)))
