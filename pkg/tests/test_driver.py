import math

import numpy as np
import pytest
from helpers import naive_residual, random_sparse_system

import supertomo as st


def _row(indices, weights):
    return st.SparseRow(np.asarray(indices), np.asarray(weights, dtype=float))


class TestResiduals:
    def test_feasible_point_zero(self):
        rng = np.random.default_rng(0)
        system, x_star = random_sparse_system(rng, 10, st.Grid(2, 3))
        assert st.res(x_star, system) == 0.0
        assert st.dist_normalized(x_star, system) == 0.0

    def test_single_row_example(self):
        system = st.ProjectionSystem(rows=[_row([0], [1.0])], b=np.array([2.0]),
                                     box=(0.0, 10.0), grid=st.Grid(1, 2))
        assert st.res(np.zeros((1, 2)), system) == 2.0

    def test_matches_naive_loop(self):
        rng = np.random.default_rng(1)
        system, _ = random_sparse_system(rng, 15, st.Grid(3, 3))
        x = rng.normal(size=(3, 3))
        assert st.res(x, system) == pytest.approx(naive_residual(x, system), rel=1e-12)

    def test_normalized_matches_naive_loop(self):
        rng = np.random.default_rng(2)
        system, _ = random_sparse_system(rng, 12, st.Grid(3, 3))
        x = rng.normal(size=(3, 3))
        total = 0.0
        for row, b_i in zip(system.rows, system.b):
            r = (b_i - row.dot(x.ravel())) / math.sqrt(row.norm_sq)
            total += r * r
        assert st.dist_normalized(x, system) == pytest.approx(
            math.sqrt(total), rel=1e-12)

    def test_normalized_invariant_to_row_scaling(self):
        base_row = _row([0, 1], [1.0, 2.0])
        scaled_row = _row([0, 1], [3.0, 6.0])
        x = np.array([[0.4, -0.2]])
        a = st.ProjectionSystem(rows=[base_row], b=np.array([1.0]),
                                box=(0, 1), grid=st.Grid(1, 2))
        b = st.ProjectionSystem(rows=[scaled_row], b=np.array([3.0]),
                                box=(0, 1), grid=st.Grid(1, 2))
        assert st.dist_normalized(x, a) == pytest.approx(
            st.dist_normalized(x, b), rel=1e-12)

    def test_normalized_skips_empty_rows(self):
        system = st.build_system([st.Ray(0.0, 0.0), st.Ray(0.0, 2.0)], st.Grid(4, 4))
        system = system.with_b(np.array([1.0, 7.0]))
        assert math.isfinite(st.dist_normalized(np.zeros((4, 4)), system))
        # the empty row's b still contributes to the plain residual
        assert st.res(np.zeros((4, 4)), system) == pytest.approx(
            math.sqrt(1.0 + 49.0), rel=1e-12)


class TestMse:
    def test_identical_zero(self):
        x = np.random.default_rng(3).normal(size=(4, 4))
        assert st.mse(x, x) == 0.0

    def test_constant_offset(self):
        x = np.zeros((5, 6))
        assert st.mse(x + 0.25, x) == pytest.approx(0.25, rel=1e-15)

    def test_arithmetic_example(self):
        assert st.mse(np.array([[3.0, 4.0]]), np.zeros((1, 2))) == pytest.approx(
            math.sqrt(25 / 2), rel=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            st.mse(np.zeros((2, 2)), np.zeros((2, 3)))


class TestSuperConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(beta0=0.0), dict(beta0=-1.0), dict(gamma=0.0), dict(gamma=1.0),
        dict(epsilon=-0.1), dict(max_outer=0), dict(max_inner_attempts=0),
    ])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            st.SuperConfig(**kwargs)


class TestSuperiorize:
    def test_immediate_return_below_threshold(self):
        rng = np.random.default_rng(4)
        system, x_star = random_sparse_system(rng, 8, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=1e-6, perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, x_star, config)
        assert result.termination == st.TERMINATION_RES
        assert result.records == []
        assert np.array_equal(result.image, x_star)

    def test_vanishing_beta_matches_plain_art(self):
        rng = np.random.default_rng(5)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(beta0=1e-15, gamma=0.5, epsilon=0.0, max_outer=5,
                                perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, np.zeros((2, 3)), config)
        plain = np.zeros((2, 3))
        for _ in range(5):
            plain = st.art_sweep(plain, system)
        assert np.abs(result.image - plain).max() <= 1e-9

    def test_art_mode_identical_to_repeated_sweeps(self):
        rng = np.random.default_rng(6)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=0.0, max_outer=4, perturber=None)
        result = st.superiorize(system, np.zeros((2, 3)), config)
        plain = np.zeros((2, 3))
        for _ in range(4):
            plain = st.art_sweep(plain, system)
        assert np.array_equal(result.image, plain)
        assert all(r.beta_used == 0.0 and r.perturb_norm == 0.0
                   for r in result.records)

    def test_desk_scale_tv_prox_run(self):
        grid = st.Grid(32, 32)
        truth = st.shepp_logan(32, 32)
        rays = st.make_parallel_geometry(20, 0, 9, 65, -1, 1)
        system = st.build_system(rays, grid)
        system = system.with_b(st.forward_project(system, truth))
        config = st.SuperConfig(beta0=10.0, gamma=0.5, epsilon=1e-3, max_outer=2000,
                                perturber=st.make_perturber("prox-tv"))
        result = st.superiorize(system, np.zeros(grid.shape), config,
                                ground_truth=truth)
        assert result.termination == st.TERMINATION_RES
        res_values = [r.res for r in result.records]
        assert all(b < a for a, b in zip(res_values, res_values[1:]))
        assert res_values[0] < result.initial_res
        # perturbation acceptance never raised the objective
        for r in result.records:
            if r.beta_used > 0.0:
                assert r.phi_perturbed <= r.phi_before + 1e-12
        # beta halves across consecutive first-attempt acceptances
        for a, b in zip(result.records, result.records[1:]):
            if a.inner_attempts == 1 and b.inner_attempts == 1 \
                    and a.beta_used > 0 and b.beta_used > 0:
                assert b.beta_used <= 0.5 * a.beta_used * (1 + 1e-12)
        # summability of the perturbations
        ratios = [r.perturb_norm / r.beta_used
                  for r in result.records if r.beta_used > 0]
        total = sum(r.perturb_norm for r in result.records)
        if ratios:
            assert total <= max(ratios) * 10.0 / (1 - 0.5) + 1e-9
        # all iterates stay in the box; the final image is representative
        lo, hi = system.box
        assert result.image.min() >= lo and result.image.max() <= hi
        # ground truth provided, so every record carries an error value
        assert all(r.mse is not None for r in result.records)

    def test_stall_terminates_with_fallback_reason(self):
        # two parallel one-pixel hyperplanes cannot both hold: the sweep
        # always lands on the second one and the residual stops improving
        rows = [_row([0], [1.0]), _row([0], [1.0])]
        system = st.ProjectionSystem(rows=rows, b=np.array([0.0, 1.0]),
                                     box=(0.0, 10.0), grid=st.Grid(1, 1))
        config = st.SuperConfig(beta0=1.0, gamma=0.5, epsilon=0.0, max_outer=50,
                                max_inner_attempts=5,
                                perturber=st.make_perturber("prox-l2"))
        x0 = np.array([[0.5]])
        result = st.superiorize(system, x0, config)
        assert result.termination == st.TERMINATION_STALL
        assert result.records == []
        assert np.array_equal(result.image, x0)

    def test_max_outer_reason(self):
        rng = np.random.default_rng(7)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=0.0, max_outer=3,
                                perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, np.zeros((2, 3)), config)
        assert result.termination == st.TERMINATION_MAX_OUTER
        assert len(result.records) == 3 and result.n_outer == 3

    def test_relative_epsilon(self):
        rng = np.random.default_rng(8)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon_rel=1.0, max_outer=50,
                                perturber=st.make_perturber("prox-l2"))
        # threshold ||b|| is met at the start image already after one sweep
        result = st.superiorize(system, np.zeros((2, 3)), config)
        assert result.termination == st.TERMINATION_RES

    def test_record_history_flag(self):
        rng = np.random.default_rng(9)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=0.0, max_outer=3, record_history=False,
                                perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, np.zeros((2, 3)), config)
        assert result.records == [] and result.n_outer == 3


class TestHistoryCsv:
    def test_format_and_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        system, _ = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=0.0, max_outer=4,
                                perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, np.zeros((2, 3)), config)
        path = tmp_path / "history.csv"
        st.write_history_csv(result.records, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("ascii").splitlines()
        assert lines[0] == st.HISTORY_HEADER
        assert len(lines) == 1 + len(result.records)
        for line, record in zip(lines[1:], result.records):
            fields = line.split(",")
            assert int(fields[0]) == record.k
            assert float(fields[3]) == record.res
            assert fields[5] == ""  # no ground truth: empty mse column
            assert float(fields[6]) == record.perturb_norm

    def test_mse_column_filled_with_ground_truth(self, tmp_path):
        rng = np.random.default_rng(11)
        system, x_star = random_sparse_system(rng, 10, st.Grid(2, 3))
        config = st.SuperConfig(epsilon=0.0, max_outer=2,
                                perturber=st.make_perturber("prox-l2"))
        result = st.superiorize(system, np.zeros((2, 3)), config,
                                ground_truth=x_star)
        path = tmp_path / "history.csv"
        st.write_history_csv(result.records, path)
        lines = path.read_text().splitlines()
        assert float(lines[1].split(",")[5]) == result.records[0].mse
