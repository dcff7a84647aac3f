import numpy as np
import pytest

from blockkaczmarz.linalg import pinv_apply
from blockkaczmarz.paving import COLUMNS, ROWS, Partition, paving_bounds, random_partition
from blockkaczmarz.solvers import (
    BLOCK,
    BLOCK_CD,
    DOUBLE,
    HYBRID,
    REK,
    RK,
    ConfigError,
    MethodConfig,
    NormSampler,
    SolverState,
    StopRule,
    block_cd_step,
    block_kaczmarz_step,
    double_block_step,
    epoch_length,
    hybrid_step,
    initial_state,
    make_block_plan,
    rek_step,
    rk_step,
    run,
)
from blockkaczmarz.systems import make_system


def small_system(rng, n=20, d=10, inconsistent=False):
    a = rng.standard_normal((n, d))
    x = rng.standard_normal(d)
    b = a @ x
    if inconsistent:
        b = b + rng.standard_normal(n)
    return make_system(a, b)


def whole_partition(size, axis):
    return Partition(axis=axis, blocks=(np.arange(size),), universe_size=size)


class TestEpochLength:
    def test_row_methods_take_n(self):
        assert epoch_length(REK, 300) == 300
        assert epoch_length(RK, 17) == 17

    def test_block_methods_take_block_count(self):
        assert epoch_length(DOUBLE, 300, row_blocks=30) == 30
        assert epoch_length(BLOCK, 300, row_blocks=12) == 12
        assert epoch_length(HYBRID, 300, row_blocks=30) == 30

    def test_column_block_method_takes_ceil(self):
        assert epoch_length(BLOCK_CD, 300, col_blocks=30) == 10
        assert epoch_length(BLOCK_CD, 10, col_blocks=3) == 4

    def test_missing_counts_rejected(self):
        with pytest.raises(ValueError):
            epoch_length(BLOCK, 300)
        with pytest.raises(ValueError):
            epoch_length(BLOCK_CD, 300)


class TestNormSampler:
    def test_frequencies_track_weights(self):
        sampler = NormSampler(np.array([1.0, 3.0]))
        rng = np.random.default_rng(0)
        draws = np.array([sampler.draw(rng) for _ in range(20000)])
        assert abs(np.mean(draws == 1) - 0.75) < 0.02

    def test_rejects_zero_weight(self):
        with pytest.raises(ValueError, match="positive"):
            NormSampler(np.array([1.0, 0.0]))


class TestRkStep:
    def test_identity_projection(self):
        state = SolverState(x=np.zeros(2), z=None)
        out = rk_step(state, np.eye(2), np.array([1.0, 2.0]), np.random.default_rng(0), row_index=0)
        assert np.array_equal(out.x, [1.0, 0.0])
        assert out.last_row == 0 and out.iteration == 1

    def test_symmetric_projection(self):
        a = np.array([[1.0, 1.0]])
        state = SolverState(x=np.zeros(2), z=None)
        out = rk_step(state, a, np.array([2.0]), np.random.default_rng(0), row_index=0)
        np.testing.assert_allclose(out.x, [1.0, 1.0], atol=1e-15)

    def test_sampled_constraint_holds_after_step(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        state = initial_state(sys_, RK)
        g = np.random.default_rng(3)
        for _ in range(50):
            state = rk_step(state, sys_.a, sys_.b, g)
            i = state.last_row
            assert abs(sys_.a[i] @ state.x - sys_.b[i]) <= 1e-12 * (abs(sys_.b[i]) + np.linalg.norm(sys_.a[i]) * np.linalg.norm(state.x))

    def test_inputs_not_mutated(self, rng):
        sys_ = small_system(rng)
        state = initial_state(sys_, RK)
        x_before = state.x.copy()
        rk_step(state, sys_.a, sys_.b, np.random.default_rng(0))
        assert np.array_equal(state.x, x_before)


class TestRekStep:
    def test_identity_example(self):
        a = np.eye(2)
        b = np.array([1.0, 2.0])
        state = SolverState(x=np.zeros(2), z=b.copy())
        out = rek_step(state, a, b, np.random.default_rng(0), row_index=0, col_index=0)
        assert np.array_equal(out.z, [0.0, 2.0])
        assert np.array_equal(out.x, [1.0, 0.0])

    def test_fixed_point_at_solution(self, rng):
        sys_ = small_system(rng)  # consistent
        state = SolverState(x=sys_.x_ls.copy(), z=np.zeros(sys_.n_rows))
        g = np.random.default_rng(1)
        for _ in range(20):
            state = rek_step(state, sys_.a, sys_.b, g)
        assert np.linalg.norm(state.x - sys_.x_ls) <= 1e-10 * np.linalg.norm(sys_.x_ls)
        assert np.linalg.norm(state.z) <= 1e-10 * np.linalg.norm(sys_.b)

    def test_z_orthogonal_to_sampled_column(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        state = initial_state(sys_, REK)
        g = np.random.default_rng(5)
        for _ in range(50):
            state = rek_step(state, sys_.a, sys_.b, g)
            k = state.last_col
            col = sys_.a[:, k]
            assert abs(col @ state.z) <= 1e-12 * np.linalg.norm(col) * max(np.linalg.norm(state.z), 1e-30)


class TestBlockKaczmarzStep:
    def test_single_block_solves_in_one_step(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        plan = make_block_plan(sys_.a, whole_partition(sys_.n_rows, ROWS))
        state = initial_state(sys_, BLOCK)
        out = block_kaczmarz_step(state, sys_.b, plan, np.random.default_rng(0))
        assert np.linalg.norm(out.x - sys_.x_ls) <= 1e-10 * np.linalg.norm(sys_.x_ls)

    def test_satisfied_block_is_fixed_point(self, rng):
        sys_ = small_system(rng)  # consistent: x_ls satisfies every block
        plan = make_block_plan(sys_.a, random_partition(sys_.n_rows, 4, rng))
        state = SolverState(x=sys_.x_ls.copy(), z=None)
        out = block_kaczmarz_step(state, sys_.b, plan, np.random.default_rng(0))
        assert np.linalg.norm(out.x - sys_.x_ls) <= 1e-12 * np.linalg.norm(sys_.x_ls)

    def test_block_residual_vanishes_after_step(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        plan = make_block_plan(sys_.a, random_partition(sys_.n_rows, 5, rng))
        state = initial_state(sys_, BLOCK)
        g = np.random.default_rng(2)
        for _ in range(40):
            state = block_kaczmarz_step(state, sys_.b, plan, g)
            k = state.last_row_block
            idx = plan.block(k)
            resid = np.linalg.norm(sys_.b[idx] - plan.submatrices[k] @ state.x)
            scale = np.linalg.norm(sys_.b[idx]) + np.linalg.norm(plan.submatrices[k]) * np.linalg.norm(state.x)
            assert resid <= 1e-10 * scale


class TestDoubleBlockStep:
    def test_identity_single_blocks(self):
        sys_ = make_system(np.eye(2), np.array([1.0, 2.0]))
        row_plan = make_block_plan(sys_.a, whole_partition(2, ROWS))
        col_plan = make_block_plan(sys_.a, whole_partition(2, COLUMNS))
        state = initial_state(sys_, DOUBLE)
        out = double_block_step(state, sys_.b, row_plan, col_plan, np.random.default_rng(0))
        assert np.allclose(out.z, 0.0, atol=1e-14)
        np.testing.assert_allclose(out.x, [1.0, 2.0], atol=1e-14)

    def test_rhs_orthogonal_to_range_is_fixed(self, rng):
        # b entirely outside the range: once z captures it, x stays at zero
        q = np.linalg.qr(rng.standard_normal((6, 2)))[0]
        a = q[:, :1]  # 6x1, range = span(q0)
        b = q[:, 1]  # orthogonal to range
        sys_ = make_system(a, b)
        row_plan = make_block_plan(a, whole_partition(6, ROWS))
        col_plan = make_block_plan(a, whole_partition(1, COLUMNS))
        state = initial_state(sys_, DOUBLE)
        g = np.random.default_rng(0)
        for _ in range(10):
            state = double_block_step(state, b, row_plan, col_plan, g)
            assert np.allclose(state.x, 0.0, atol=1e-12)

    def test_per_step_contracts(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        row_plan = make_block_plan(sys_.a, random_partition(20, 4, rng))
        col_plan = make_block_plan(sys_.a, random_partition(10, 4, rng, axis=COLUMNS))
        state = initial_state(sys_, DOUBLE)
        g = np.random.default_rng(9)
        for _ in range(100):
            z_prev = state.z
            state = double_block_step(state, sys_.b, row_plan, col_plan, g)
            t = state.last_col_block
            col_block = col_plan.submatrices[t]
            # projection removed the column-block component of z
            assert np.linalg.norm(col_block.T @ state.z) <= 1e-10 * np.linalg.norm(col_block) * max(
                np.linalg.norm(z_prev), 1e-30
            )
            # row-block equations hold against b - z
            u = state.last_row_block
            idx = row_plan.block(u)
            sub = row_plan.submatrices[u]
            resid = np.linalg.norm(sys_.b[idx] - state.z[idx] - sub @ state.x)
            scale = np.linalg.norm(sys_.b[idx]) + np.linalg.norm(sub) * np.linalg.norm(state.x) + np.linalg.norm(state.z)
            assert resid <= 1e-10 * scale

    def test_orthogonal_error_decomposition(self, rng):
        # squared error splits exactly into the part untouched by the row
        # block and the part injected by the z mismatch on that block
        sys_ = small_system(rng, inconsistent=True)
        row_plan = make_block_plan(sys_.a, random_partition(20, 4, rng))
        col_plan = make_block_plan(sys_.a, random_partition(10, 4, rng, axis=COLUMNS))
        state = initial_state(sys_, DOUBLE)
        g = np.random.default_rng(12)
        for _ in range(60):
            x_prev = state.x
            state = double_block_step(state, sys_.b, row_plan, col_plan, g)
            u = state.last_row_block
            fact = row_plan.factorizations[u]
            idx = row_plan.block(u)
            v = fact.v[:, : fact.rank]
            err_prev = x_prev - sys_.x_ls
            untouched = err_prev - v @ (v.T @ err_prev)
            injected = pinv_apply(fact, state.z[idx] - sys_.b_perp[idx])
            lhs = np.sum((state.x - sys_.x_ls) ** 2)
            rhs = np.sum(untouched**2) + np.sum(injected**2)
            assert abs(lhs - rhs) <= 1e-8 * max(lhs, rhs, 1e-30)

    def test_fixed_point_at_least_squares(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        row_plan = make_block_plan(sys_.a, random_partition(20, 4, rng))
        col_plan = make_block_plan(sys_.a, random_partition(10, 2, rng, axis=COLUMNS))
        state = SolverState(x=sys_.x_ls.copy(), z=sys_.b_perp.copy())
        g = np.random.default_rng(3)
        for _ in range(20):
            state = double_block_step(state, sys_.b, row_plan, col_plan, g)
        assert np.linalg.norm(state.x - sys_.x_ls) <= 1e-10 * np.linalg.norm(sys_.x_ls)
        assert np.linalg.norm(state.z - sys_.b_perp) <= 1e-10 * np.linalg.norm(sys_.b)


class TestBlockCdStep:
    def test_identity_single_coordinate_block(self):
        sys_ = make_system(np.eye(3), np.array([1.0, 2.0, 3.0]))
        part = Partition(axis=COLUMNS, blocks=(np.array([0]), np.array([1]), np.array([2])), universe_size=3)
        plan = make_block_plan(sys_.a, part)
        state = initial_state(sys_, BLOCK_CD)
        out = block_cd_step(state, sys_.b, plan, np.random.default_rng(0), block_index=0)
        assert np.array_equal(out.x, [1.0, 0.0, 0.0])
        assert np.array_equal(out.z, [0.0, 2.0, 3.0])

    def test_zero_residual_is_fixed_point(self, rng):
        sys_ = small_system(rng)
        plan = make_block_plan(sys_.a, random_partition(10, 3, rng, axis=COLUMNS))
        state = SolverState(x=sys_.x_ls.copy(), z=np.zeros(20))
        g = np.random.default_rng(0)
        for _ in range(10):
            state = block_cd_step(state, sys_.b, plan, g)
        assert np.linalg.norm(state.x - sys_.x_ls) <= 1e-12 * np.linalg.norm(sys_.x_ls)

    def test_rank_deficient_matrix_reduces_image_error(self, rng):
        # with duplicated columns only the image error is meaningful; the
        # iterate itself need not approach the minimum-norm solution
        base = rng.standard_normal((20, 5))
        a = np.hstack([base, base[:, :1]])
        sys_ = make_system(a, rng.standard_normal(20))
        plan = make_block_plan(a, random_partition(6, 2, rng, axis=COLUMNS))
        state = initial_state(sys_, BLOCK_CD)
        g = np.random.default_rng(1)
        for _ in range(400):
            state = block_cd_step(state, sys_.b, plan, g)
        image_err = np.linalg.norm(a @ (state.x - sys_.x_ls))
        assert image_err <= 1e-8 * np.linalg.norm(sys_.b)
        # the trace still reports both norms
        trace = run(
            sys_,
            MethodConfig(BLOCK_CD, col_partition=plan.partition, seed=2),
            StopRule(max_epochs=5, error_threshold=1e-300),
        )
        assert np.isfinite(trace.rows[-1].error_l2)
        assert np.isfinite(trace.rows[-1].residual_l2)

    def test_residual_identity_many_steps(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        plan = make_block_plan(sys_.a, random_partition(10, 3, rng, axis=COLUMNS))
        state = initial_state(sys_, BLOCK_CD)
        g = np.random.default_rng(7)
        sigma_max = sys_.spectral.sigma_max
        for _ in range(500):
            state = block_cd_step(state, sys_.b, plan, g)
            gap = np.linalg.norm(state.z - (sys_.b - sys_.a @ state.x))
            assert gap <= 1e-10 * (np.linalg.norm(sys_.b) + sigma_max * np.linalg.norm(state.x))


class TestZMonotonicity:
    def test_double_and_blockcd_never_increase_z_error(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        row_plan = make_block_plan(sys_.a, random_partition(20, 4, rng))
        col_plan = make_block_plan(sys_.a, random_partition(10, 4, rng, axis=COLUMNS))
        for method in (DOUBLE, BLOCK_CD):
            state = initial_state(sys_, method)
            g = np.random.default_rng(4)
            prev = np.linalg.norm(state.z - sys_.b_perp)
            for _ in range(80):
                if method == DOUBLE:
                    state = double_block_step(state, sys_.b, row_plan, col_plan, g)
                else:
                    state = block_cd_step(state, sys_.b, col_plan, g)
                cur = np.linalg.norm(state.z - sys_.b_perp)
                assert cur <= prev * (1 + 1e-12)
                prev = cur


def test_exact_block_contraction_enumeration(rng):
    # averaging the projected residual over every block of the partition is a
    # deterministic finite enumeration, no sampling involved
    for _ in range(5):
        a = rng.standard_normal((12, 6))
        part = random_partition(12, 3, rng)
        plan = make_block_plan(a, part)
        params = paving_bounds(a, part)
        sigma_min = np.linalg.svd(a, compute_uv=False)[-1]
        u = rng.standard_normal(6)
        acc = 0.0
        for k in range(3):
            fact = plan.factorizations[k]
            v = fact.v[:, : fact.rank]
            residual = u - v @ (v.T @ u)
            acc += np.sum(residual**2)
        mean = acc / 3.0
        bound = (1.0 - sigma_min**2 / (3 * params.beta)) * np.sum(u**2)
        assert mean <= bound * (1 + 1e-12)


class TestHybrid:
    def test_step_mechanics(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        row_plan = make_block_plan(sys_.a, random_partition(20, 4, rng))
        state = initial_state(sys_, HYBRID)
        g = np.random.default_rng(0)
        state = hybrid_step(state, sys_.a, sys_.b, row_plan, g)
        k = state.last_col
        assert abs(sys_.a[:, k] @ state.z) <= 1e-12 * np.linalg.norm(sys_.a[:, k]) * np.linalg.norm(sys_.b)

    def test_degrades_relative_to_double(self, rng):
        # mismatched projection/update speeds need more epochs on the same system
        sys_ = small_system(rng, n=60, d=20, inconsistent=True)
        rowp = random_partition(60, 6, np.random.default_rng(1))
        colp = random_partition(20, 5, np.random.default_rng(2), axis=COLUMNS)
        stop = StopRule(max_epochs=2000, error_threshold=1e-6)
        t_double = run(sys_, MethodConfig(DOUBLE, row_partition=rowp, col_partition=colp, seed=3), stop)
        t_hybrid = run(sys_, MethodConfig(HYBRID, row_partition=rowp, seed=3), stop)
        assert t_double.converged
        assert t_hybrid.final_epoch > t_double.final_epoch


class TestRun:
    def test_unreachable_threshold_row_count(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        trace = run(sys_, MethodConfig(RK, seed=0), StopRule(max_epochs=7, error_threshold=1e-300))
        assert len(trace.rows) == 8
        assert [r.epoch for r in trace.rows] == list(range(8))
        assert not trace.converged

    def test_start_at_solution_halts_immediately(self):
        # zero right-hand side puts the initial iterate exactly at the solution
        sys_ = make_system(np.eye(3), np.zeros(3))
        trace = run(sys_, MethodConfig(RK, seed=0), StopRule(max_epochs=10, error_threshold=1e-12))
        assert len(trace.rows) == 1
        assert trace.converged and trace.rows[0].epoch == 0

    def test_max_epochs_zero_gives_single_row(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        trace = run(sys_, MethodConfig(RK, seed=0), StopRule(max_epochs=0, error_threshold=1e-12))
        assert len(trace.rows) == 1

    def test_deterministic_replay(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        colp = random_partition(10, 3, np.random.default_rng(0), axis=COLUMNS)
        stop = StopRule(max_epochs=20, error_threshold=1e-9)
        t1 = run(sys_, MethodConfig(BLOCK_CD, col_partition=colp, seed=42), stop)
        t2 = run(sys_, MethodConfig(BLOCK_CD, col_partition=colp, seed=42), stop)
        assert len(t1.rows) == len(t2.rows)
        for r1, r2 in zip(t1.rows, t2.rows):
            assert r1.error_l2 == r2.error_l2
            assert r1.residual_l2 == r2.residual_l2
            assert r1.z_error_l2 == r2.z_error_l2
        assert np.array_equal(t1.final_x, t2.final_x)

    def test_z_error_column_only_for_z_methods(self, rng):
        sys_ = small_system(rng)
        stop = StopRule(max_epochs=2, error_threshold=1e-300)
        assert run(sys_, MethodConfig(RK, seed=0), stop).rows[0].z_error_l2 is None
        assert run(sys_, MethodConfig(REK, seed=0), stop).rows[0].z_error_l2 is not None

    def test_error_fn_overrides_metric(self, rng):
        sys_ = small_system(rng)
        stop = StopRule(max_epochs=3, error_threshold=1e-300)
        trace = run(sys_, MethodConfig(RK, seed=0), stop, error_fn=lambda x: 7.5)
        assert all(r.error_l2 == 7.5 for r in trace.rows)

    def test_residual_stagnation_without_oracle(self, rng):
        a = rng.standard_normal((15, 5))
        x = rng.standard_normal(5)
        sys_ = make_system(a, a @ x, with_oracle=False)
        trace = run(sys_, MethodConfig(RK, seed=0), StopRule(max_epochs=500, error_threshold=1e-9))
        assert trace.converged
        assert np.isnan(trace.rows[0].error_l2)
        assert trace.rows[-1].residual_l2 <= 1e-6 * np.linalg.norm(sys_.b)

    def test_cpu_seconds_cumulative(self, rng):
        sys_ = small_system(rng, inconsistent=True)
        trace = run(sys_, MethodConfig(REK, seed=0), StopRule(max_epochs=5, error_threshold=1e-300))
        cpus = [r.cpu_seconds for r in trace.rows]
        assert cpus[0] == 0.0
        assert all(b >= a for a, b in zip(cpus, cpus[1:]))


class TestConsistentConvergence:
    def test_all_five_methods_reach_threshold(self):
        rng = np.random.default_rng(77)
        a = rng.standard_normal((60, 20))
        x = rng.standard_normal(20)
        sys_ = make_system(a, a @ x)
        rowp = random_partition(60, 6, np.random.default_rng(1))
        colp = random_partition(20, 5, np.random.default_rng(2), axis=COLUMNS)
        stop = StopRule(max_epochs=800, error_threshold=1e-6)
        configs = {
            RK: MethodConfig(RK, seed=10),
            REK: MethodConfig(REK, seed=11),
            BLOCK: MethodConfig(BLOCK, row_partition=rowp, seed=12),
            DOUBLE: MethodConfig(DOUBLE, row_partition=rowp, col_partition=colp, seed=13),
            BLOCK_CD: MethodConfig(BLOCK_CD, col_partition=colp, seed=14),
        }
        for method, config in configs.items():
            trace = run(sys_, config, stop)
            assert trace.converged, f"{method} did not reach 1e-6 (err {trace.final_error:.2e})"


class TestConfigValidation:
    def test_missing_partitions(self, rng):
        sys_ = small_system(rng)
        stop = StopRule(max_epochs=1, error_threshold=1e-6)
        for method in (BLOCK, DOUBLE, BLOCK_CD):
            with pytest.raises(ConfigError, match="requires"):
                run(sys_, MethodConfig(method, seed=0), stop)

    def test_extraneous_partition_rejected(self, rng):
        sys_ = small_system(rng)
        rowp = random_partition(20, 2, rng)
        with pytest.raises(ConfigError, match="does not take"):
            run(sys_, MethodConfig(RK, row_partition=rowp, seed=0), StopRule(1, 1e-6))

    def test_wrong_partition_size(self, rng):
        sys_ = small_system(rng)
        rowp = random_partition(19, 2, rng)
        with pytest.raises(ConfigError, match="does not match"):
            run(sys_, MethodConfig(BLOCK, row_partition=rowp, seed=0), StopRule(1, 1e-6))

    def test_wrong_axis(self, rng):
        sys_ = small_system(rng)
        colp_as_row = random_partition(20, 2, rng, axis=COLUMNS)
        with pytest.raises(ConfigError, match="does not match"):
            run(sys_, MethodConfig(BLOCK, row_partition=colp_as_row, seed=0), StopRule(1, 1e-6))

    def test_unknown_method(self, rng):
        sys_ = small_system(rng)
        with pytest.raises(ConfigError, match="unknown method"):
            run(sys_, MethodConfig("sor", seed=0), StopRule(1, 1e-6))

    def test_stop_rule_validation(self):
        with pytest.raises(ConfigError):
            StopRule(max_epochs=-1, error_threshold=1e-6)
        with pytest.raises(ConfigError):
            StopRule(max_epochs=5, error_threshold=0.0)
