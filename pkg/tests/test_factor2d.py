import numpy as np
import pytest

from specfactor import corpus, verify
from specfactor.factor2d import (
    NotStrictlyPositiveError,
    cesaro_smooth,
    choose_truncation,
    estimate_delta,
    factor_cesaro,
    factor_strict,
    inverse_cesaro,
    lift_to_block,
    remainder_bound,
    unlift_factor,
)
from specfactor.poly import (
    MatrixAnalyticPoly1,
    MatrixLaurentPoly2,
)


def scalar_laurent2(causal):
    return MatrixLaurentPoly2.from_causal(1, {idx: [[v]] for idx, v in causal.items()})


Q_PLANE = scalar_laurent2({(0, 0): 5.0, (1, 0): 1.0, (0, 1): 1.0})
Q_NONSTRICT = scalar_laurent2({(0, 0): 4.0, (1, 0): 1.0, (0, 1): 1.0})


class TestCesaroWeights:
    def test_identity_when_no_second_variable(self):
        q = scalar_laurent2({(0, 0): 3.0, (1, 0): 1.0})
        out = cesaro_smooth(q, 0)
        assert out.coeff(1, 0)[0, 0] == pytest.approx(1.0)

    def test_single_weight(self):
        q = scalar_laurent2({(0, 0): 0.0, (0, 1): 1.0})
        out = cesaro_smooth(q, 1)
        assert out.coeff(0, 1)[0, 0] == pytest.approx(0.5)

    def test_by_hand_weights(self):
        out = cesaro_smooth(Q_PLANE, 4)
        assert out.coeff(0, 0)[0, 0] == pytest.approx(5.0)
        assert out.coeff(1, 0)[0, 0] == pytest.approx(1.0)
        assert out.coeff(0, 1)[0, 0] == pytest.approx(0.8)

    def test_inverse_single_weight(self):
        q = scalar_laurent2({(0, 0): 0.0, (0, 1): 1.0})
        out = inverse_cesaro(q, 1)
        assert out.coeff(0, 1)[0, 0] == pytest.approx(2.0)

    def test_rejects_small_truncation(self):
        q = scalar_laurent2({(0, 0): 1.0, (0, 2): 0.25})
        with pytest.raises(ValueError, match="N >= m2"):
            cesaro_smooth(q, 1)

    def test_cancellation_is_ulp_exact(self):
        # the weights cancel algebraically; in binary64 the round trip is
        # correct to the last unit in each coefficient entry
        rng = np.random.default_rng(8)
        for _ in range(10):
            q = corpus.sos_instance2(rng, 2, 2, 2)
            for n in (q.deg2, q.deg2 + 3):
                back = cesaro_smooth(inverse_cesaro(q, n), n)
                for idx, c in q.coeffs.items():
                    np.testing.assert_allclose(back.coeff(*idx), c, rtol=1e-15, atol=0)


class TestRemainderBound:
    def test_zero_without_second_variable(self):
        q = scalar_laurent2({(0, 0): 3.0, (1, 0): 1.0})
        assert remainder_bound(q, 5) == 0.0

    def test_by_hand(self):
        for n in (2, 4, 8):
            assert remainder_bound(Q_PLANE, n) == pytest.approx(2.0 / n)

    def test_homogeneous_scaling(self):
        q3 = scalar_laurent2({(0, 0): 15.0, (1, 0): 3.0, (0, 1): 3.0})
        assert remainder_bound(q3, 4) == pytest.approx(3.0 * remainder_bound(Q_PLANE, 4))

    def test_sound_on_grid(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            q = corpus.sos_instance2(rng, 2, 1, 2)
            n = q.deg2 + 1
            widened = inverse_cesaro(q, n)
            bound = remainder_bound(q, n)
            grid = verify.GridSpec(7, 7)  # 128 x 128
            zs = grid.points1()
            worst = 0.0
            from specfactor.poly import eval2_grid

            diff = eval2_grid(widened, zs, zs) - eval2_grid(q, zs, zs)
            herm = (diff + np.conj(np.swapaxes(diff, -1, -2))) / 2
            eigs = np.linalg.eigvalsh(herm)
            worst = float(np.max(np.abs(eigs)))
            assert worst <= bound + 1e-9 * q.scale


class TestChooseTruncation:
    def test_example_with_third_margin(self):
        plan = choose_truncation(Q_PLANE, 1.0, margin=1.0 / 3.0)
        assert plan.n == 4
        assert plan.bound_s == pytest.approx(0.5)

    def test_degenerate_second_variable(self):
        q = scalar_laurent2({(0, 0): 3.0, (1, 0): 1.0})
        plan = choose_truncation(q, 1.0, margin=0.5)
        assert plan.n == 0
        assert plan.bound_s == 0.0

    def test_larger_delta_never_increases_n(self):
        for margin in (0.25, 1.0 / 3.0, 0.5):
            n_small = choose_truncation(Q_PLANE, 0.7, margin=margin).n
            n_large = choose_truncation(Q_PLANE, 1.4, margin=margin).n
            assert n_large <= n_small

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(ValueError, match="positive"):
            choose_truncation(Q_PLANE, 0.0)


class TestLiftToBlock:
    def test_constant_scalar(self):
        q = scalar_laurent2({(0, 0): 3.0})
        psi = lift_to_block(q, 1)
        np.testing.assert_allclose(psi.coeff(0), 1.5 * np.eye(2), atol=1e-14)

    def test_second_variable_becomes_offdiagonal(self):
        q = scalar_laurent2({(0, 0): 0.0, (0, 1): 1.0})
        psi = lift_to_block(q, 1)
        np.testing.assert_allclose(
            psi.coeff(0), np.array([[0.0, 0.5], [0.5, 0.0]]), atol=1e-14
        )

    def test_first_variable_passthrough(self):
        q = scalar_laurent2({(0, 0): 0.0, (1, 0): 1.0})
        psi = lift_to_block(q, 0)
        assert psi.size == 1
        assert psi.coeff(1)[0, 0] == pytest.approx(1.0)
        assert psi.coeff(-1)[0, 0] == pytest.approx(1.0)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(10)
        q = corpus.sos_instance2(rng, 2, 2, 1)
        psi = lift_to_block(q, 3)
        for k, c in psi.coeffs.items():
            np.testing.assert_array_equal(psi.coeff(-k), c.conj().T)


class TestUnliftFactor:
    def test_trivial_when_n_zero(self):
        phi = MatrixAnalyticPoly1([np.array([[2.0]]), np.array([[1.0]])])
        (f,) = unlift_factor(phi, 1, 0)
        assert f.coeff(0, 0)[0, 0] == pytest.approx(2.0)
        assert f.coeff(1, 0)[0, 0] == pytest.approx(1.0)

    def test_column_orientation(self):
        # left block column carries the top exponent of the second variable
        phi = MatrixAnalyticPoly1([np.array([[1.0, 2.0], [3.0, 4.0]])])
        f0, f1 = unlift_factor(phi, 1, 1)
        assert f0.coeff(0, 1)[0, 0] == pytest.approx(1.0)
        assert f0.coeff(0, 0)[0, 0] == pytest.approx(2.0)
        assert f1.coeff(0, 1)[0, 0] == pytest.approx(3.0)
        assert f1.coeff(0, 0)[0, 0] == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        phi = MatrixAnalyticPoly1([np.eye(3)])
        with pytest.raises(ValueError, match="shape"):
            unlift_factor(phi, 2, 1)


class TestFactorCesaro:
    def test_constant(self):
        q = scalar_laurent2({(0, 0): 4.0})
        factors, rep = factor_cesaro(q, 0)
        assert len(factors) == 1
        assert factors[0].coeff(0, 0)[0, 0] == pytest.approx(2.0, abs=1e-9)

    def test_reduces_to_one_variable(self):
        # boundary zero at z1 = -1: completes in the gap-dominated
        # degraded mode, so coefficients are accurate to the reported gap
        q = scalar_laurent2({(0, 0): 2.0, (1, 0): 1.0})
        factors, rep = factor_cesaro(q, 0)
        assert len(factors) == 1
        f = factors[0]
        tol = max(10 * rep.gap, 1e-6)
        assert abs(f.coeff(0, 0)[0, 0] - 1.0) <= tol
        assert abs(f.coeff(1, 0)[0, 0] - 1.0) <= tol
        assert rep.residual_sup <= tol

    def test_product_instance(self):
        # (2 + z1 + z1^-1)(2 + z2 + z2^-1), smoothed at N = 2
        q = scalar_laurent2(
            {
                (0, 0): 4.0,
                (1, 0): 2.0,
                (0, 1): 2.0,
                (1, 1): 1.0,
                (1, -1): 1.0,
            }
        )
        factors, rep = factor_cesaro(q, 2)
        target = cesaro_smooth(q, 2)
        resid = verify.residual(target, factors, verify.GridSpec(6, 6))
        assert resid <= 1e-6 * q.scale
        assert len(factors) <= 3
        assert all(f.deg1 <= q.deg1 for f in factors)

    def test_random_sums_of_squares(self):
        rng = np.random.default_rng(45)
        for _ in range(3):
            q = corpus.sos_instance2(rng, 2, 2, 2)
            for n in (q.deg2, q.deg2 + 2):
                factors, rep = factor_cesaro(q, n)
                target = cesaro_smooth(q, n)
                resid = verify.residual(target, factors, verify.GridSpec(6, 6))
                assert resid <= 1e-6 * q.scale
                assert len(factors) <= n + 1
                assert all(f.deg1 <= q.deg1 for f in factors)

    def test_rejects_negative(self):
        q = scalar_laurent2({(0, 0): 0.0, (1, 0): 1.0})
        from specfactor.factor1d import NotNonnegativeError

        with pytest.raises(NotNonnegativeError):
            factor_cesaro(q, 2)


class TestFactorStrict:
    def test_constant(self):
        q = scalar_laurent2({(0, 0): 2.0})
        factors, rep, plan = factor_strict(q)
        assert plan.n == 0
        assert len(factors) == 1
        assert factors[0].coeff(0, 0)[0, 0] == pytest.approx(np.sqrt(2.0), abs=1e-9)

    def test_plane_instance_end_to_end(self):
        factors, rep, plan = factor_strict(Q_PLANE)
        assert plan.n == 4
        assert len(factors) <= 5
        assert rep.residual_sup <= 1e-6 * Q_PLANE.scale
        assert all(f.deg1 <= 1 for f in factors)

    def test_rejects_nonstrict(self):
        with pytest.raises(NotStrictlyPositiveError, match="not strictly positive"):
            factor_strict(Q_NONSTRICT)

    def test_delta_override(self):
        factors, rep, plan = factor_strict(Q_PLANE, delta=1.0)
        assert plan.delta_est == pytest.approx(1.0)
        assert rep.residual_sup <= 1e-6 * Q_PLANE.scale

    def test_independent_of_second_variable_collapses(self):
        q = scalar_laurent2({(0, 0): 5.0, (1, 0): 2.0})
        factors, rep, plan = factor_strict(q)
        assert plan.n == 0
        assert len(factors) == 1
        f = factors[0]
        assert abs(f.coeff(0, 0)[0, 0] - 2.0) <= 1e-6
        assert abs(f.coeff(1, 0)[0, 0] - 1.0) <= 1e-6

    def test_matrix_instance(self):
        rng = np.random.default_rng(55)
        base = corpus.sos_instance2(rng, 2, 1, 1)
        coeffs = dict(base.coeffs)
        coeffs[(0, 0)] = coeffs[(0, 0)] + 0.5 * base.scale * np.eye(2)
        q = MatrixLaurentPoly2(2, coeffs)
        factors, rep, plan = factor_strict(q)
        assert rep.residual_sup <= 1e-6 * q.scale
        assert len(factors) <= plan.n + 1
        assert all(f.deg1 <= q.deg1 for f in factors)

    def test_estimate_delta_guard_is_conservative(self):
        est = estimate_delta(Q_PLANE, verify.GridSpec(9, 9))
        assert 0.0 < est < 1.0  # true minimum is exactly 1
