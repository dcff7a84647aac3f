"""Randomized Kaczmarz-family iterative solvers.

Five methods share one run loop:

``rk``
    Project onto the hyperplane of one equation per step, with the row
    sampled proportionally to its squared norm.
``rek``
    Extended variant: an auxiliary vector ``z`` (initialized to ``b``) is
    projected off one random column direction per step, which drives ``z``
    to the component of ``b`` orthogonal to the range; the row update then
    solves against ``b - z``, so the iterate converges to the least-squares
    solution even on inconsistent systems.
``block``
    Project onto the solution space of a whole row block at once, using the
    block pseudoinverse; blocks are drawn uniformly from a fixed partition.
``double``
    Block version of ``rek``: a column block projects ``z`` off a slice of
    the range, then a row block performs the Kaczmarz update against
    ``b - z``.  Requires both a row and a column partition.
``blockcd``
    Block coordinate descent on the least-squares objective: only a column
    partition is needed.  The residual estimate ``z`` always equals
    ``b - a @ x`` (up to roundoff), and only the coordinates of the chosen
    column block change per step.

A sixth tag ``hybrid`` (single-column projection + row-block update) exists
only to demonstrate that mismatched projection/update speeds degrade
convergence; it is not a supported method.

Each step function is pure: it returns a fresh state and never mutates its
inputs, so independent runs can share the same matrix and cached block
factorizations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import SvdFactorization, as_matrix, as_vector, pinv_apply
from .paving import COLUMNS, ROWS, Partition, block_factorizations
from .systems import LinearSystem

RK = "rk"
REK = "rek"
BLOCK = "block"
DOUBLE = "double"
BLOCK_CD = "blockcd"
HYBRID = "hybrid"

METHODS = (RK, REK, BLOCK, DOUBLE, BLOCK_CD)


class ConfigError(ValueError):
    """Raised when a method configuration is inconsistent before any step runs."""


@dataclass(frozen=True)
class SolverState:
    """Iterate ``x``, auxiliary vector ``z`` (``None`` for methods without one),
    and the indices sampled by the most recent step (diagnostics only)."""

    x: np.ndarray
    z: np.ndarray | None
    iteration: int = 0
    last_row: int | None = None
    last_col: int | None = None
    last_row_block: int | None = None
    last_col_block: int | None = None


@dataclass(frozen=True)
class StopRule:
    """Halt after ``max_epochs`` epochs or once the epoch error reaches
    ``error_threshold``.

    The threshold applies to the solution error when an exact solution (or an
    ``error_fn``) is available, and otherwise to epoch-over-epoch residual
    stagnation: the run halts once the relative residual change over one
    epoch drops to the threshold.
    """

    max_epochs: int
    error_threshold: float

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if not self.error_threshold > 0:
            raise ConfigError(f"error_threshold must be positive, got {self.error_threshold}")


@dataclass(frozen=True)
class MethodConfig:
    """Which method to run, its partitions, and the seed of its random stream."""

    method: str
    row_partition: Partition | None = None
    col_partition: Partition | None = None
    seed: int = 0

    def validate(self, n_rows: int, n_cols: int) -> None:
        if self.method not in METHODS + (HYBRID,):
            raise ConfigError(f"unknown method {self.method!r}")
        needs_row = self.method in (BLOCK, DOUBLE, HYBRID)
        needs_col = self.method in (DOUBLE, BLOCK_CD)
        if needs_row and self.row_partition is None:
            raise ConfigError(f"method {self.method!r} requires a row partition")
        if needs_col and self.col_partition is None:
            raise ConfigError(f"method {self.method!r} requires a column partition")
        if not needs_row and self.row_partition is not None:
            raise ConfigError(f"method {self.method!r} does not take a row partition")
        if not needs_col and self.col_partition is not None:
            raise ConfigError(f"method {self.method!r} does not take a column partition")
        if self.row_partition is not None:
            if self.row_partition.axis != ROWS or self.row_partition.universe_size != n_rows:
                raise ConfigError("row partition does not match the system's rows")
        if self.col_partition is not None:
            if self.col_partition.axis != COLUMNS or self.col_partition.universe_size != n_cols:
                raise ConfigError("column partition does not match the system's columns")


@dataclass(frozen=True)
class TraceRow:
    epoch: int
    error_l2: float
    residual_l2: float
    z_error_l2: float | None
    cpu_seconds: float


@dataclass
class Trace:
    """Per-epoch telemetry of one solver run."""

    method: str
    rows: list[TraceRow] = field(default_factory=list)
    final_x: np.ndarray | None = None
    converged: bool = False

    @property
    def final_error(self) -> float:
        return self.rows[-1].error_l2

    @property
    def final_epoch(self) -> int:
        return self.rows[-1].epoch


class NormSampler:
    """Draw indices with probability proportional to given squared norms."""

    def __init__(self, sq_norms: np.ndarray):
        sq_norms = as_vector(sq_norms, "sq_norms")
        if np.any(sq_norms <= 0):
            raise ValueError("squared norms must be positive (zero rows/columns are not samplable)")
        self.sq_norms = sq_norms
        self._cdf = np.cumsum(sq_norms)

    def draw(self, rng: np.random.Generator) -> int:
        u = rng.random() * self._cdf[-1]
        return int(np.searchsorted(self._cdf, u, side="right"))


def row_sampler(a: np.ndarray) -> NormSampler:
    a = as_matrix(a)
    return NormSampler(np.einsum("ij,ij->i", a, a))


def col_sampler(a: np.ndarray) -> NormSampler:
    a = as_matrix(a)
    return NormSampler(np.einsum("ij,ij->j", a, a))


@dataclass(frozen=True)
class BlockPlan:
    """A partition with its block submatrices and SVDs, cached once per run."""

    partition: Partition
    submatrices: tuple[np.ndarray, ...]
    factorizations: tuple[SvdFactorization, ...]

    @property
    def n_blocks(self) -> int:
        return self.partition.n_blocks

    def block(self, k: int) -> np.ndarray:
        return self.partition.blocks[k]


def make_block_plan(a: np.ndarray, partition: Partition) -> BlockPlan:
    a = as_matrix(a)
    facts = block_factorizations(a, partition)
    if partition.axis == ROWS:
        subs = tuple(np.ascontiguousarray(a[idx, :]) for idx in partition.blocks)
    else:
        subs = tuple(np.ascontiguousarray(a[:, idx]) for idx in partition.blocks)
    return BlockPlan(partition=partition, submatrices=subs, factorizations=tuple(facts))


def _remove_range_component(fact: SvdFactorization, v: np.ndarray) -> np.ndarray:
    """Project ``v`` off the range of the factored matrix: ``v - U U^T v``."""
    r = fact.rank
    if r == 0:
        return v.copy()
    u = fact.u[:, :r]
    return v - u @ (u.T @ v)


def rk_step(
    state: SolverState,
    a: np.ndarray,
    b: np.ndarray,
    rng: np.random.Generator,
    sampler: NormSampler | None = None,
    row_index: int | None = None,
) -> SolverState:
    """One randomized row projection: move ``x`` onto the hyperplane of row ``i``.

    The row is sampled with probability proportional to its squared norm
    unless ``row_index`` pins it (used by tests and diagnostics).
    """
    if sampler is None:
        sampler = row_sampler(a)
    i = sampler.draw(rng) if row_index is None else int(row_index)
    row = a[i]
    x = state.x + ((b[i] - row @ state.x) / sampler.sq_norms[i]) * row
    return replace(state, x=x, iteration=state.iteration + 1, last_row=i)


def rek_step(
    state: SolverState,
    a: np.ndarray,
    b: np.ndarray,
    rng: np.random.Generator,
    rows: NormSampler | None = None,
    cols: NormSampler | None = None,
    row_index: int | None = None,
    col_index: int | None = None,
) -> SolverState:
    """One extended-Kaczmarz step: column projection of ``z``, then a row update.

    The column draw happens before the row draw, and the row update uses the
    freshly updated ``z``.  Rows and columns are sampled independently, each
    proportionally to their squared norms.
    """
    if rows is None:
        rows = row_sampler(a)
    if cols is None:
        cols = col_sampler(a)
    k = cols.draw(rng) if col_index is None else int(col_index)
    i = rows.draw(rng) if row_index is None else int(row_index)
    col = a[:, k]
    z = state.z - ((col @ state.z) / cols.sq_norms[k]) * col
    row = a[i]
    x = state.x + ((b[i] - z[i] - row @ state.x) / rows.sq_norms[i]) * row
    return replace(state, x=x, z=z, iteration=state.iteration + 1, last_row=i, last_col=k)


def block_kaczmarz_step(
    state: SolverState,
    b: np.ndarray,
    row_plan: BlockPlan,
    rng: np.random.Generator,
    block_index: int | None = None,
) -> SolverState:
    """Project ``x`` onto the solution space of one row block, drawn uniformly."""
    k = int(rng.integers(row_plan.n_blocks)) if block_index is None else int(block_index)
    idx = row_plan.block(k)
    sub = row_plan.submatrices[k]
    x = state.x + pinv_apply(row_plan.factorizations[k], b[idx] - sub @ state.x)
    return replace(state, x=x, iteration=state.iteration + 1, last_row_block=k)


def double_block_step(
    state: SolverState,
    b: np.ndarray,
    row_plan: BlockPlan,
    col_plan: BlockPlan,
    rng: np.random.Generator,
    col_block: int | None = None,
    row_block: int | None = None,
) -> SolverState:
    """One double-block step: column-block projection of ``z``, then a row-block update.

    The column block removes the component of ``z`` lying in the span of
    those columns; the row block then projects ``x`` onto the solution space
    of ``a_block x = (b - z)_block`` using the updated ``z``.
    """
    t = int(rng.integers(col_plan.n_blocks)) if col_block is None else int(col_block)
    u = int(rng.integers(row_plan.n_blocks)) if row_block is None else int(row_block)
    z = _remove_range_component(col_plan.factorizations[t], state.z)
    idx = row_plan.block(u)
    sub = row_plan.submatrices[u]
    x = state.x + pinv_apply(row_plan.factorizations[u], b[idx] - z[idx] - sub @ state.x)
    return replace(
        state, x=x, z=z, iteration=state.iteration + 1, last_row_block=u, last_col_block=t
    )


def block_cd_step(
    state: SolverState,
    b: np.ndarray,
    col_plan: BlockPlan,
    rng: np.random.Generator,
    block_index: int | None = None,
) -> SolverState:
    """One block coordinate-descent step on a uniformly drawn column block.

    Solves the least-squares subproblem of the block against the current
    residual estimate ``z``, adds the correction to the block's coordinates
    of ``x``, and removes the explained part from ``z``; this keeps
    ``z == b - a @ x`` exact up to roundoff.
    """
    k = int(rng.integers(col_plan.n_blocks)) if block_index is None else int(block_index)
    sub = col_plan.submatrices[k]
    w = pinv_apply(col_plan.factorizations[k], state.z)
    x = state.x.copy()
    x[col_plan.block(k)] += w
    z = state.z - sub @ w
    return replace(state, x=x, z=z, iteration=state.iteration + 1, last_col_block=k)


def hybrid_step(
    state: SolverState,
    a: np.ndarray,
    b: np.ndarray,
    row_plan: BlockPlan,
    rng: np.random.Generator,
    cols: NormSampler | None = None,
    col_index: int | None = None,
    row_block: int | None = None,
) -> SolverState:
    """Experimental mismatched step: single-column projection + row-block update.

    Kept only to reproduce the qualitative observation that running the
    projection and the Kaczmarz update at different speeds degrades
    convergence; the ``z`` sequence advances one column at a time while the
    ``x`` update consumes a whole row block.
    """
    if cols is None:
        cols = col_sampler(a)
    k = cols.draw(rng) if col_index is None else int(col_index)
    u = int(rng.integers(row_plan.n_blocks)) if row_block is None else int(row_block)
    col = a[:, k]
    z = state.z - ((col @ state.z) / cols.sq_norms[k]) * col
    idx = row_plan.block(u)
    sub = row_plan.submatrices[u]
    x = state.x + pinv_apply(row_plan.factorizations[u], b[idx] - z[idx] - sub @ state.x)
    return replace(state, x=x, z=z, iteration=state.iteration + 1, last_row_block=u, last_col=k)


def epoch_length(method: str, n_rows: int, row_blocks: int | None = None, col_blocks: int | None = None) -> int:
    """Number of iterations that counts as one epoch (one sweep through the rows).

    Row methods take ``n_rows`` iterations per epoch, block row methods one
    iteration per row block, and the column-block method ``ceil(n/p)``
    iterations where ``p`` is the number of column blocks.
    """
    if n_rows < 1:
        raise ValueError("n_rows must be positive")
    if method in (RK, REK):
        return n_rows
    if method in (BLOCK, DOUBLE, HYBRID):
        if not row_blocks or row_blocks < 1:
            raise ValueError(f"method {method!r} needs a positive row block count")
        return row_blocks
    if method == BLOCK_CD:
        if not col_blocks or col_blocks < 1:
            raise ValueError(f"method {method!r} needs a positive column block count")
        return -(-n_rows // col_blocks)
    raise ValueError(f"unknown method {method!r}")


def initial_state(system: LinearSystem, method: str) -> SolverState:
    """Zero iterate, with ``z`` initialized to ``b`` for methods that carry one."""
    z = system.b.copy() if method in (REK, DOUBLE, BLOCK_CD, HYBRID) else None
    return SolverState(x=np.zeros(system.n_cols), z=z)


def run(
    system: LinearSystem,
    config: MethodConfig,
    stop: StopRule,
    error_fn=None,
) -> Trace:
    """Run one method on one system, recording one trace row per epoch.

    Parameters
    ----------
    system : LinearSystem
    config : MethodConfig
        Fully determines the method and its random stream; two runs with the
        same config on the same system produce identical traces except for
        ``cpu_seconds``.
    stop : StopRule
    error_fn : callable, optional
        Maps the iterate to the reported error; defaults to the distance to
        ``system.x_ls``.  Used e.g. to report errors in original coordinates
        when solving a column-rescaled system.

    Returns
    -------
    Trace
        Rows for epoch 0 (initial state) through the stopping epoch.
        ``cpu_seconds`` accumulates process CPU time spent inside solver
        iterations only (telemetry and stopping checks are excluded).
    """
    a, b = system.a, system.b
    config.validate(system.n_rows, system.n_cols)
    method = config.method

    row_plan = make_block_plan(a, config.row_partition) if config.row_partition is not None else None
    col_plan = make_block_plan(a, config.col_partition) if config.col_partition is not None else None
    rng = np.random.default_rng(config.seed)

    if method == RK:
        rows = row_sampler(a)
        step = lambda s: rk_step(s, a, b, rng, sampler=rows)
    elif method == REK:
        rows, cols = row_sampler(a), col_sampler(a)
        step = lambda s: rek_step(s, a, b, rng, rows=rows, cols=cols)
    elif method == BLOCK:
        step = lambda s: block_kaczmarz_step(s, b, row_plan, rng)
    elif method == DOUBLE:
        step = lambda s: double_block_step(s, b, row_plan, col_plan, rng)
    elif method == BLOCK_CD:
        step = lambda s: block_cd_step(s, b, col_plan, rng)
    elif method == HYBRID:
        cols = col_sampler(a)
        step = lambda s: hybrid_step(s, a, b, row_plan, rng, cols=cols)
    else:  # pragma: no cover - already rejected by validate()
        raise ConfigError(f"unknown method {method!r}")

    iters_per_epoch = epoch_length(
        method,
        system.n_rows,
        row_blocks=row_plan.n_blocks if row_plan is not None else None,
        col_blocks=col_plan.n_blocks if col_plan is not None else None,
    )

    state = initial_state(system, method)
    trace = Trace(method=method)
    solver_cpu = 0.0

    error_based = error_fn is not None or system.x_ls is not None

    def record(epoch: int) -> float:
        if error_fn is not None:
            err = float(error_fn(state.x))
        elif system.x_ls is not None:
            err = float(np.linalg.norm(state.x - system.x_ls))
        else:
            err = float("nan")
        resid = float(np.linalg.norm(b - a @ state.x))
        z_err = None
        if state.z is not None and system.b_perp is not None:
            z_err = float(np.linalg.norm(state.z - system.b_perp))
        trace.rows.append(TraceRow(epoch, err, resid, z_err, solver_cpu))
        return err if error_based else resid

    metric = record(0)
    prev_metric = metric
    if error_based and metric <= stop.error_threshold:
        trace.converged = True
    else:
        for epoch in range(1, stop.max_epochs + 1):
            t0 = time.process_time()
            for _ in range(iters_per_epoch):
                state = step(state)
            solver_cpu += time.process_time() - t0
            metric = record(epoch)
            if error_based:
                if metric <= stop.error_threshold:
                    trace.converged = True
                    break
            else:
                if abs(prev_metric - metric) <= stop.error_threshold * max(trace.rows[0].residual_l2, 1e-300):
                    trace.converged = True
                    break
            prev_metric = metric

    trace.final_x = state.x.copy()
    return trace
