"""Dense linear algebra substrate shared by the solvers.

Everything here operates on plain float64 numpy arrays: matrices are 2-D
row-major arrays, vectors are 1-D arrays.  All functions are pure and never
mutate their inputs, so factorizations and matrices can be shared freely
across concurrent solver runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOLERANCE = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-D float64 array with finite entries."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Validate and return ``v`` as a 1-D float64 array with finite entries."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return the product ``a @ x`` with an explicit dimension check."""
    a = as_matrix(a)
    x = as_vector(x, "x")
    if x.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: matrix has {a.shape[1]} columns, vector has {x.shape[0]}")
    return a @ x


def rmatvec(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return the adjoint product ``a.T @ y`` with an explicit dimension check."""
    a = as_matrix(a)
    y = as_vector(y, "y")
    if y.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: matrix has {a.shape[0]} rows, vector has {y.shape[0]}")
    return a.T @ y


def row_submatrix(a: np.ndarray, indices) -> np.ndarray:
    """Return a contiguous copy of the rows of ``a`` selected by ``indices``.

    Order is preserved; duplicate indices are rejected.
    """
    a = as_matrix(a)
    idx = _check_indices(indices, a.shape[0], "row")
    return np.ascontiguousarray(a[idx, :])


def col_submatrix(a: np.ndarray, indices) -> np.ndarray:
    """Return a contiguous copy of the columns of ``a`` selected by ``indices``."""
    a = as_matrix(a)
    idx = _check_indices(indices, a.shape[1], "column")
    return np.ascontiguousarray(a[:, idx])


def _check_indices(indices, bound: int, kind: str) -> np.ndarray:
    idx = np.asarray(indices, dtype=int)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError(f"{kind} index set must be a nonempty 1-D sequence")
    if idx.min() < 0 or idx.max() >= bound:
        raise ValueError(f"{kind} index out of range [0, {bound})")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"duplicate {kind} indices")
    return idx


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD ``a = u @ diag(s) @ v.T`` with a numerical-rank cutoff.

    ``u`` and ``v`` have orthonormal columns, ``singular_values`` is
    nonincreasing, and ``rank`` counts the singular values exceeding
    ``rank_tolerance * s[0]``.
    """

    u: np.ndarray
    singular_values: np.ndarray
    v: np.ndarray
    rank_tolerance: float
    rank: int

    @property
    def n_rows(self) -> int:
        return self.u.shape[0]

    @property
    def n_cols(self) -> int:
        return self.v.shape[0]


def svd_factor(a: np.ndarray, rank_tolerance: float = DEFAULT_RANK_TOLERANCE) -> SvdFactorization:
    """Factor ``a`` by a thin SVD.

    Parameters
    ----------
    a : (n, d) array
    rank_tolerance : float in [0, 1)
        Singular values at or below ``rank_tolerance * s_max`` are treated as
        zero when the factorization is used to apply the pseudoinverse.

    Raises
    ------
    ValueError
        On invalid input, and if the underlying LAPACK iteration fails to
        converge (no silent garbage).
    """
    a = as_matrix(a)
    if not 0.0 <= rank_tolerance < 1.0:
        raise ValueError(f"rank_tolerance must lie in [0, 1), got {rank_tolerance}")
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD failed to converge for {a.shape[0]}x{a.shape[1]} matrix") from exc
    cutoff = rank_tolerance * s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > cutoff))
    return SvdFactorization(u=u, singular_values=s, v=vt.T, rank_tolerance=float(rank_tolerance), rank=rank)


def pinv_apply(fact: SvdFactorization, v: np.ndarray) -> np.ndarray:
    """Apply the pseudoinverse of the factored matrix to ``v``.

    Only singular values above the factorization's rank cutoff are inverted;
    components along discarded directions are dropped, so the result is the
    minimum-norm least-squares solution of ``a x = v``.
    """
    if v.shape[0] != fact.u.shape[0]:
        raise ValueError(f"dimension mismatch: factorization has {fact.u.shape[0]} rows, vector has {v.shape[0]}")
    r = fact.rank
    if r == 0:
        return np.zeros(fact.v.shape[0])
    coeff = (fact.u[:, :r].T @ v) / fact.singular_values[:r]
    return fact.v[:, :r] @ coeff


def min_norm_lstsq(a: np.ndarray, b: np.ndarray, rank_tolerance: float = DEFAULT_RANK_TOLERANCE) -> np.ndarray:
    """Return the minimum-norm least-squares solution of ``a x = b`` via SVD."""
    a = as_matrix(a)
    b = as_vector(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: matrix has {a.shape[0]} rows, rhs has {b.shape[0]}")
    return pinv_apply(svd_factor(a, rank_tolerance), b)


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral constants of a matrix derived from its thin SVD.

    ``condition`` is ``sigma_max / sigma_min_nonzero`` and
    ``scaled_condition`` is ``frobenius / sigma_min_nonzero``; the latter
    squared is at least the numerical rank.
    """

    sigma_min_nonzero: float
    sigma_max: float
    frobenius: float
    condition: float
    scaled_condition: float


def spectral_summary(a: np.ndarray, rank_tolerance: float = DEFAULT_RANK_TOLERANCE) -> SpectralSummary:
    """Compute :class:`SpectralSummary` for a nonzero matrix."""
    a = as_matrix(a)
    fact = svd_factor(a, rank_tolerance)
    if fact.rank == 0:
        raise ValueError("spectral summary undefined for the zero matrix")
    s = fact.singular_values
    sigma_max = float(s[0])
    sigma_min = float(s[fact.rank - 1])
    fro = float(np.linalg.norm(a))
    return SpectralSummary(
        sigma_min_nonzero=sigma_min,
        sigma_max=sigma_max,
        frobenius=fro,
        condition=sigma_max / sigma_min,
        scaled_condition=fro / sigma_min,
    )
