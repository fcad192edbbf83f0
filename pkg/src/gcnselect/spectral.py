"""Full eigen-spectrum of symmetric sparse operators and its summary statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, SpectrumCapError
from .graph import SparseMatrix

DENSE_CAP = 5000
ASYMMETRY_TOL = 1e-12
ZERO_TOL = 1e-5


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def count_near_zero(self, tol: float = ZERO_TOL) -> int:
        return int(np.count_nonzero(np.abs(self.eigenvalues) < tol))


@dataclass(frozen=True)
class SpectrumStats:
    min: float
    median: float
    avg: float
    std: float
    max: float


def eigenvalues_symmetric(
    m: SparseMatrix,
    want_vectors: bool = False,
    *,
    cap: int = DENSE_CAP,
    allow_large: bool = False,
) -> SpectrumResult:
    """Dense symmetric eigensolve of ``m``; eigenvalues ascending.

    Uses LAPACK ``?syev`` (Householder tridiagonalization followed by implicit
    QL/QR). Matrices above ``cap`` rows are refused unless ``allow_large``;
    PUBMED-sized inputs need a few GB of workspace.
    """
    if m.num_rows != m.num_cols:
        raise ValueError(f"matrix must be square, got {m.num_rows}x{m.num_cols}")
    if m.num_rows > cap and not allow_large:
        raise SpectrumCapError(
            f"spectrum cap exceeded: {m.num_rows} rows > dense cap {cap}; "
            "rerun with --allow-large to force the dense eigensolve"
        )
    asym = m.max_asymmetry()
    if asym > ASYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
    if m.num_rows == 0:
        return SpectrumResult(np.empty(0), np.empty((0, 0)) if want_vectors else None)

    dense = m.to_dense()
    if want_vectors:
        vals, vecs = scipy.linalg.eigh(dense, driver="ev", overwrite_a=True)
    else:
        vals = scipy.linalg.eigh(dense, eigvals_only=True, driver="ev", overwrite_a=True)
        vecs = None
    if not np.all(np.isfinite(vals)):
        raise NumericalError("eigensolver returned non-finite eigenvalues")
    return SpectrumResult(vals, vecs)


def check_trace(m: SparseMatrix, s: SpectrumResult, rel_tol: float = 1e-6) -> None:
    """Raise ``NumericalError`` unless ``trace(m)`` equals the eigenvalue sum."""
    trace = float(m.diagonal().sum())
    total = float(s.eigenvalues.sum())
    if abs(trace - total) > rel_tol * max(abs(trace), 1.0):
        raise NumericalError(f"trace check failed: trace={trace!r}, sum(eigs)={total!r}")


def spectrum_stats(s: SpectrumResult) -> SpectrumStats:
    vals = np.sort(np.asarray(s.eigenvalues, dtype=np.float64))
    if vals.size == 0:
        raise ValueError("empty spectrum")
    mid = vals.size // 2
    median = vals[mid] if vals.size % 2 else 0.5 * (vals[mid - 1] + vals[mid])
    return SpectrumStats(
        min=float(vals[0]),
        median=float(median),
        avg=float(vals.mean()),
        std=float(vals.std(ddof=0)),
        max=float(vals[-1]),
    )
