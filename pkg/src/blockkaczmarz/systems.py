"""Least-squares problem instances with precomputed ground truth.

A :class:`LinearSystem` bundles the matrix, the right-hand side, the exact
minimum-norm least-squares solution, and the orthogonal decomposition of the
right-hand side into its components inside and orthogonal to the range of the
matrix.  Solvers treat all of it as read-only; the exact solution is what the
per-epoch error telemetry is measured against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DEFAULT_RANK_TOLERANCE,
    SpectralSummary,
    as_matrix,
    as_vector,
    pinv_apply,
    svd_factor,
)


@dataclass(frozen=True)
class LinearSystem:
    """Immutable problem instance ``a x ~ b`` with oracle data.

    ``b_range + b_perp == b`` where ``b_range = a @ x_ls`` lies in the range
    of ``a`` and ``b_perp`` is orthogonal to it; ``norm(b_perp)`` equals the
    least-squares residual norm.  ``x_ls`` may be ``None`` for systems built
    with ``with_oracle=False``, in which case error-based stopping is
    unavailable.
    """

    a: np.ndarray
    b: np.ndarray
    x_ls: np.ndarray | None
    spectral: SpectralSummary | None
    b_range: np.ndarray | None
    b_perp: np.ndarray | None

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]

    @property
    def n_cols(self) -> int:
        return self.a.shape[1]


def make_system(
    a: np.ndarray,
    b: np.ndarray,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    with_oracle: bool = True,
) -> LinearSystem:
    """Build a :class:`LinearSystem`, solving for the exact solution once.

    The full SVD used for the oracle is computed here and nowhere else, so
    solver timings never include it.
    """
    a = as_matrix(a)
    b = as_vector(b, "b")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"dimension mismatch: matrix has {a.shape[0]} rows, rhs has {b.shape[0]}")
    if not with_oracle:
        return LinearSystem(a=a, b=b, x_ls=None, spectral=None, b_range=None, b_perp=None)
    fact = svd_factor(a, rank_tolerance)
    if fact.rank == 0:
        raise ValueError("cannot build a system on the zero matrix")
    x_ls = pinv_apply(fact, b)
    b_range = a @ x_ls
    s = fact.singular_values
    sigma_max = float(s[0])
    sigma_min = float(s[fact.rank - 1])
    fro = float(np.linalg.norm(a))
    spectral = SpectralSummary(
        sigma_min_nonzero=sigma_min,
        sigma_max=sigma_max,
        frobenius=fro,
        condition=sigma_max / sigma_min,
        scaled_condition=fro / sigma_min,
    )
    return LinearSystem(a=a, b=b, x_ls=x_ls, spectral=spectral, b_range=b_range, b_perp=b - b_range)
