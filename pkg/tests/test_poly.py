import numpy as np
import pytest

from specfactor.poly import (
    MatrixAnalyticPoly1,
    MatrixAnalyticPoly2,
    MatrixLaurentPoly1,
    MatrixLaurentPoly2,
    PolyFormatError,
    adjoint_product,
    adjoint_product_list2,
    block_toeplitz,
    circle_grid,
    eval1,
    eval1_grid,
    eval2,
    load_poly,
    poly_from_json,
    save_poly,
    toeplitz_psd_check,
)

E12 = np.array([[0.0, 1.0], [0.0, 0.0]])


def scalar_laurent(causal):
    return MatrixLaurentPoly1.from_causal(1, {k: [[v]] for k, v in causal.items()})


def scalar_analytic(coeffs):
    return MatrixAnalyticPoly1([np.array([[c]]) for c in coeffs])


class TestLaurentConstruction:
    def test_symmetry_enforced(self):
        with pytest.raises(ValueError, match="symmetry"):
            MatrixLaurentPoly1(1, {1: [[1.0]]})

    def test_symmetry_canonicalized(self):
        q = MatrixLaurentPoly1(2, {0: np.eye(2), 1: E12, -1: E12.conj().T})
        np.testing.assert_array_equal(q.coeff(-1), q.coeff(1).conj().T)

    def test_degree_is_tight(self):
        q = MatrixLaurentPoly1(1, {0: [[1.0]], 2: [[0.0]], -2: [[0.0]]})
        assert q.degree == 0

    def test_two_variable_symmetry(self):
        with pytest.raises(ValueError, match="symmetry"):
            MatrixLaurentPoly2(1, {(1, 1): [[1.0]], (-1, -1): [[2.0]]})


class TestEval1:
    def test_scalar_at_one(self):
        q = scalar_laurent({0: 5.0, 1: 2.0})
        assert eval1(q, 1.0)[0, 0] == pytest.approx(9.0)

    def test_scalar_at_i(self):
        q = scalar_laurent({0: 5.0, 1: 2.0})
        assert eval1(q, 1j)[0, 0] == pytest.approx(5.0, abs=1e-13)

    def test_constant_identity(self):
        q = MatrixLaurentPoly1.from_causal(2, {0: np.eye(2)})
        np.testing.assert_allclose(eval1(q, np.exp(0.3j)), np.eye(2), atol=1e-14)

    def test_rejects_off_circle_laurent(self):
        q = scalar_laurent({0: 5.0, 1: 2.0})
        with pytest.raises(ValueError, match="unit circle"):
            eval1(q, 0.5)

    def test_analytic_inside_disk(self):
        p = scalar_analytic([1.0, 2.0])
        assert eval1(p, 0.5)[0, 0] == pytest.approx(2.0)

    def test_hermitian_on_circle(self):
        rng = np.random.default_rng(3)
        p = MatrixAnalyticPoly1(
            [rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(3)]
        )
        q = adjoint_product(p)
        z = np.exp(2j * np.pi * 0.1234)
        v = eval1(q, z)
        assert np.max(np.abs(v - v.conj().T)) <= 1e-10 * q.scale


class TestEval2:
    def test_at_minus_one_pair(self):
        q = MatrixLaurentPoly2.from_causal(
            1, {(0, 0): [[5.0]], (1, 0): [[1.0]], (0, 1): [[1.0]]}
        )
        assert eval2(q, -1.0, -1.0)[0, 0] == pytest.approx(1.0)
        assert eval2(q, 1.0, 1.0)[0, 0] == pytest.approx(9.0)

    def test_constant(self):
        q = MatrixLaurentPoly2.from_causal(2, {(0, 0): np.diag([1.0, 2.0])})
        np.testing.assert_allclose(
            eval2(q, np.exp(0.4j), np.exp(-1.1j)), np.diag([1.0, 2.0]), atol=1e-14
        )


class TestAdjointProduct:
    def test_scalar_one_plus_z(self):
        q = adjoint_product(scalar_analytic([1.0, 1.0]))
        assert q.coeff(0)[0, 0] == pytest.approx(2.0)
        assert q.coeff(1)[0, 0] == pytest.approx(1.0)
        assert q.coeff(-1)[0, 0] == pytest.approx(1.0)

    def test_scalar_two_plus_z(self):
        q = adjoint_product(scalar_analytic([2.0, 1.0]))
        assert q.coeff(0)[0, 0] == pytest.approx(5.0)
        assert q.coeff(1)[0, 0] == pytest.approx(2.0)

    def test_matrix_blockwise(self):
        p = MatrixAnalyticPoly1([np.eye(2), E12])
        q = adjoint_product(p)
        np.testing.assert_allclose(q.coeff(0), np.diag([1.0, 2.0]), atol=1e-14)
        np.testing.assert_allclose(q.coeff(1), E12, atol=1e-14)
        np.testing.assert_allclose(q.coeff(-1), E12.conj().T, atol=1e-14)

    def test_eval_consistency_random(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            r = int(rng.integers(1, 4))
            m = int(rng.integers(0, 4))
            p = MatrixAnalyticPoly1(
                [rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)) for _ in range(m + 1)]
            )
            q = adjoint_product(p)
            for t in rng.uniform(0, 1, size=4):
                z = np.exp(2j * np.pi * t)
                pv = eval1(p, z)
                assert (
                    np.max(np.abs(eval1(q, z) - pv.conj().T @ pv)) <= 1e-10 * max(q.scale, 1)
                )

    def test_degree_bound(self):
        p = scalar_analytic([1.0, 0.5, 0.25])
        assert adjoint_product(p).degree <= p.degree


class TestAdjointProductList2:
    def test_single_constant(self):
        f = MatrixAnalyticPoly2(1, 1, {(0, 0): [[np.sqrt(2.0)]]})
        q = adjoint_product_list2([f])
        assert q.coeff(0, 0)[0, 0] == pytest.approx(2.0)

    def test_one_plus_z1z2(self):
        f = MatrixAnalyticPoly2(1, 1, {(0, 0): [[1.0]], (1, 1): [[1.0]]})
        q = adjoint_product_list2([f])
        assert q.coeff(0, 0)[0, 0] == pytest.approx(2.0)
        assert q.coeff(1, 1)[0, 0] == pytest.approx(1.0)
        assert q.coeff(-1, -1)[0, 0] == pytest.approx(1.0)

    def test_two_factors_constant_sum(self):
        f1 = MatrixAnalyticPoly2(1, 1, {(0, 0): [[1.0]]})
        f2 = MatrixAnalyticPoly2(1, 1, {(1, 0): [[1.0]]})
        q = adjoint_product_list2([f1, f2])
        assert q.deg1 == 0 and q.deg2 == 0
        assert q.coeff(0, 0)[0, 0] == pytest.approx(2.0)


class TestBlockToeplitz:
    def test_tridiagonal_scalar(self):
        q = scalar_laurent({0: 2.0, 1: 1.0})
        np.testing.assert_allclose(
            block_toeplitz(q, 2), np.array([[2.0, 1.0], [1.0, 2.0]]), atol=1e-14
        )

    def test_constant_blocks(self):
        q = MatrixLaurentPoly1.from_causal(2, {0: np.diag([1.0, 3.0])})
        t = block_toeplitz(q, 3)
        np.testing.assert_allclose(t, np.kron(np.eye(3), np.diag([1.0, 3.0])), atol=1e-14)

    def test_banded(self):
        q = scalar_laurent({0: 5.0, 1: 2.0})
        expected = np.array([[5.0, 2, 0], [2, 5, 2], [0, 2, 5]])
        np.testing.assert_allclose(block_toeplitz(q, 3), expected, atol=1e-14)

    def test_exactly_hermitian(self):
        rng = np.random.default_rng(13)
        p = MatrixAnalyticPoly1(
            [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3)]
        )
        t = block_toeplitz(adjoint_product(p), 5)
        np.testing.assert_array_equal(t, t.conj().T)


class TestToeplitzPsdCheck:
    def test_nonnegative_passes(self):
        q = scalar_laurent({0: 2.0, 1: 1.0})
        verdict = toeplitz_psd_check(q, 4, tol=1e-12)
        assert verdict.ok and verdict.n_blocks == 4

    def test_sign_changing_fails(self):
        q = scalar_laurent({0: 0.0, 1: 1.0})
        verdict = toeplitz_psd_check(q, 2)
        assert not verdict.ok
        assert verdict.min_eig == pytest.approx(-1.0)

    def test_constant_one(self):
        assert toeplitz_psd_check(scalar_laurent({0: 1.0}), 8, tol=1e-12).ok


class TestFourierDuality:
    def test_grid_evals_recover_coefficients(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            r = int(rng.integers(1, 4))
            m = int(rng.integers(0, 5))
            p = MatrixAnalyticPoly1(
                [rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)) for _ in range(m + 1)]
            )
            q = adjoint_product(p)
            zs = circle_grid(6)  # 64 points
            vals = eval1_grid(q, zs)
            hat = np.fft.fft(vals, axis=0) / 64
            for k in range(-q.degree, q.degree + 1):
                assert (
                    np.max(np.abs(hat[k % 64] - q.coeff(k))) <= 1e-10 * max(q.scale, 1)
                )


class TestJsonFormat:
    def test_laurent1_roundtrip(self, tmp_path):
        q = MatrixLaurentPoly1.from_causal(2, {0: np.diag([1.0, 2.0]), 1: E12 + 0.5j * np.eye(2)})
        path = tmp_path / "q.json"
        save_poly(path, q)
        q2 = load_poly(path)
        assert isinstance(q2, MatrixLaurentPoly1)
        assert q2.degree == q.degree
        for k in range(-q.degree, q.degree + 1):
            np.testing.assert_allclose(q2.coeff(k), q.coeff(k), atol=0)

    def test_analytic1_roundtrip(self, tmp_path):
        p = MatrixAnalyticPoly1([np.eye(2), E12])
        path = tmp_path / "p.json"
        save_poly(path, p)
        p2 = load_poly(path, kind="analytic")
        assert isinstance(p2, MatrixAnalyticPoly1)
        np.testing.assert_array_equal(p2.coeffs[1], E12)

    def test_laurent2_roundtrip(self, tmp_path):
        q = MatrixLaurentPoly2.from_causal(
            1, {(0, 0): [[5.0]], (1, 0): [[1.0]], (0, 1): [[1.0]]}
        )
        path = tmp_path / "q2.json"
        save_poly(path, q)
        q2 = load_poly(path)
        assert isinstance(q2, MatrixLaurentPoly2)
        assert (q2.deg1, q2.deg2) == (1, 1)

    def test_analytic2_roundtrip(self, tmp_path):
        f = MatrixAnalyticPoly2(1, 1, {(0, 0): [[1.0]], (1, 1): [[2.0 + 1j]]})
        path = tmp_path / "f.json"
        save_poly(path, f)
        f2 = load_poly(path)
        assert isinstance(f2, MatrixAnalyticPoly2)
        assert f2.coeff(1, 1)[0, 0] == pytest.approx(2.0 + 1j)

    def test_missing_indices_mean_zero(self):
        obj = {
            "vars": 1,
            "size": 1,
            "degrees": [1],
            "coeffs": [
                {"index": [0], "matrix": [[[2.0, 0.0]]]},
                {"index": [1], "matrix": [[[1.0, 0.0]]]},
                {"index": [-1], "matrix": [[[1.0, 0.0]]]},
            ],
        }
        q = poly_from_json(obj)
        assert q.degree == 1

    def test_laurent_validation_on_load(self):
        obj = {
            "vars": 1,
            "size": 1,
            "degrees": [1],
            "coeffs": [{"index": [1], "matrix": [[[1.0, 0.0]]]}],
        }
        with pytest.raises(PolyFormatError, match="symmetry"):
            poly_from_json(obj)

    def test_analytic_skips_symmetry(self):
        obj = {
            "kind": "analytic",
            "vars": 1,
            "size": 1,
            "degrees": [1],
            "coeffs": [{"index": [1], "matrix": [[[1.0, 0.0]]]}],
        }
        p = poly_from_json(obj)
        assert isinstance(p, MatrixAnalyticPoly1)

    def test_analytic_rejects_negative_index(self):
        obj = {
            "kind": "analytic",
            "vars": 1,
            "size": 1,
            "degrees": [1],
            "coeffs": [{"index": [-1], "matrix": [[[1.0, 0.0]]]}],
        }
        with pytest.raises(PolyFormatError, match=">= 0"):
            poly_from_json(obj)

    def test_kind_mismatch_rejected(self):
        obj = {"kind": "analytic", "vars": 1, "size": 1, "degrees": [0], "coeffs": []}
        with pytest.raises(PolyFormatError, match="marked"):
            poly_from_json(obj, kind="laurent")

    def test_malformed_matrix(self):
        obj = {
            "vars": 1,
            "size": 2,
            "degrees": [0],
            "coeffs": [{"index": [0], "matrix": [[[1.0, 0.0]]]}],
        }
        with pytest.raises(PolyFormatError, match="shape"):
            poly_from_json(obj)
