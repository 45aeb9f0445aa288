"""Toeplitz/block matrix assembly and log-determinant routines."""

import numpy as np
import pytest

from portmanteau import (
    build_block,
    build_toeplitz,
    cross_correlation,
    logdet_pd,
    make_residual_series,
    schur_logdet,
    simulate,
    Arma,
    ModelSpec,
)
from portmanteau.corrmat import weighted_cross_sum
from portmanteau.errors import LagTooLarge, NotPositiveDefinite


def _random_series(rng, n=100):
    return make_residual_series(rng.standard_normal(n))


class TestBuildToeplitz:
    def test_entry_layout_m1(self):
        s = make_residual_series([1.0, 2.0, -3.0, 0.0, 1.5, 0.3, -0.7, 2.2])
        mat = build_toeplitz(s, 1, 2, 1).entries
        a = cross_correlation(s, 1, 2, -1)
        b = cross_correlation(s, 1, 2, 0)
        c = cross_correlation(s, 1, 2, 1)
        assert np.allclose(mat, [[b, c], [a, b]], atol=1e-15)

    def test_hand_oracle_entry(self):
        s = make_residual_series([1.0, 2.0, -3.0, 0.0])
        # n = 4 only admits m = 1 under m < n/2
        mat = build_toeplitz(s, 1, 2, 1).entries
        assert mat[0, 1] == pytest.approx(0.83996, abs=5e-6)

    def test_unit_diagonal_for_autocorrelation(self):
        rng = np.random.default_rng(1)
        s = _random_series(rng)
        for which, std in ((1, False), (2, False), (1, True), (2, True)):
            mat = build_toeplitz(s, which, which, 8, standardized=std).entries
            assert np.allclose(np.diag(mat), 1.0, atol=1e-15)

    def test_symmetric_toeplitz_for_autocorrelation(self):
        rng = np.random.default_rng(2)
        s = _random_series(rng)
        mat = build_toeplitz(s, 2, 2, 6).entries
        assert np.allclose(mat, mat.T, atol=1e-15)

    def test_standardized_scaling(self):
        rng = np.random.default_rng(3)
        s = _random_series(rng)
        raw = build_toeplitz(s, 1, 1, 5).entries
        std = build_toeplitz(s, 1, 1, 5, standardized=True).entries
        n = s.n
        for k in range(1, 6):
            factor = np.sqrt((n + 2.0) / (n - k))
            assert std[0, k] == pytest.approx(raw[0, k] * factor, abs=1e-14)

    def test_transpose_relation_r21_r12(self):
        rng = np.random.default_rng(4)
        s = _random_series(rng)
        r12 = build_toeplitz(s, 1, 2, 7).entries
        r21 = build_toeplitz(s, 2, 1, 7).entries
        assert np.allclose(r21, r12.T, atol=1e-15)

    def test_lag_too_large(self):
        rng = np.random.default_rng(5)
        s = _random_series(rng, n=20)
        with pytest.raises(LagTooLarge):
            build_toeplitz(s, 1, 1, 10)
        with pytest.raises(LagTooLarge):
            build_toeplitz(s, 1, 1, 0)


class TestBuildBlock:
    def test_assembly_consistency(self):
        rng = np.random.default_rng(6)
        s = _random_series(rng)
        m = 5
        block = build_block(s, m).entries
        d = m + 1
        assert np.allclose(block[:d, :d], build_toeplitz(s, 1, 1, m).entries, atol=1e-15)
        assert np.allclose(block[:d, d:], build_toeplitz(s, 1, 2, m).entries, atol=1e-15)
        assert np.allclose(block[d:, d:], build_toeplitz(s, 2, 2, m).entries, atol=1e-15)
        assert np.allclose(block[d:, :d], build_toeplitz(s, 1, 2, m).entries.T, atol=1e-15)

    def test_block_symmetric(self):
        rng = np.random.default_rng(7)
        s = _random_series(rng)
        block = build_block(s, 6).entries
        assert np.allclose(block, block.T, atol=1e-15)

    def test_zero_lag_cross_entry_position(self):
        s = make_residual_series([1.0, 2.0, -3.0, 0.0])
        block = build_block(s, 1).entries
        assert block.shape == (4, 4)
        assert block[0, 2] == pytest.approx(-0.68724, abs=5e-6)

    def test_large_sample_near_identity(self):
        z = simulate(ModelSpec(model=Arma()), 10**6, 12345)
        s = make_residual_series(z)
        block = build_block(s, 2).entries
        assert np.abs(block - np.eye(6)).max() < 0.01


class TestLogdet:
    def test_identity(self):
        for d in (1, 3, 10):
            assert logdet_pd(np.eye(d)) == pytest.approx(0.0, abs=1e-14)

    def test_two_by_two_closed_form(self):
        mat = np.array([[1.0, 0.5], [0.5, 1.0]])
        assert logdet_pd(mat) == pytest.approx(np.log(0.75), abs=1e-14)

    def test_matches_lu_oracle_on_random_spd(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            a = rng.standard_normal((8, 8))
            spd = a @ a.T + 8.0 * np.eye(8)
            sign, ld = np.linalg.slogdet(spd)
            assert sign == 1.0
            assert logdet_pd(spd) == pytest.approx(ld, abs=1e-10)

    def test_not_positive_definite_reports_pivot(self):
        with pytest.raises(NotPositiveDefinite) as exc:
            logdet_pd(np.diag([1.0, 1.0, -1.0]))
        assert exc.value.pivot == 3

    def test_sample_block_determinant_below_hadamard_bound(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            s = _random_series(rng, n=80)
            ld = logdet_pd(build_block(s, 5))
            assert ld <= 1e-9  # det of a unit-diagonal PD correlation matrix is <= 1


class TestSchur:
    def test_identity_block(self):
        assert schur_logdet(np.eye(12)) == pytest.approx(0.0, abs=1e-14)

    def test_block_diagonal_reduces_to_sum(self):
        rng = np.random.default_rng(10)
        a = rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4))
        r11 = a @ a.T + 4 * np.eye(4)
        r22 = b @ b.T + 4 * np.eye(4)
        block = np.zeros((8, 8))
        block[:4, :4] = r11
        block[4:, 4:] = r22
        assert schur_logdet(block) == pytest.approx(logdet_pd(r11) + logdet_pd(r22), abs=1e-12)

    def test_agrees_with_cholesky_on_sampled_blocks(self):
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(1000):
            m = int(rng.integers(1, 11))
            s = _random_series(rng, n=100)
            block = build_block(s, m)
            worst = max(worst, abs(logdet_pd(block) - schur_logdet(block)))
        assert worst < 1e-9


class TestTraceIdentity:
    def test_weighted_cross_sum_equals_trace(self):
        rng = np.random.default_rng(12)
        worst = 0.0
        for _ in range(300):
            m = int(rng.integers(1, 11))
            s = _random_series(rng, n=60)
            r12 = build_toeplitz(s, 1, 2, m).entries
            worst = max(worst, abs(np.trace(r12.T @ r12) - weighted_cross_sum(s, m)))
        assert worst < 1e-12
