import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belllab import qmath
from belllab.errors import DimensionMismatch, NoConvergence, NotHermitian, NotUnitary
from belllab.qmath import (
    conjugate,
    hermitian_eigen,
    is_unitary,
    max_abs,
    tensor_product,
)

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)
HAD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)

seeds = st.integers(0, 2**32 - 1)


class TestTensorProduct:
    def test_identity(self):
        np.testing.assert_array_equal(tensor_product(I2, I2), np.eye(4))

    def test_sz_sz(self):
        np.testing.assert_array_equal(tensor_product(SZ, SZ), np.diag([1, -1, -1, 1]))

    def test_block_order_is_first_factor_major(self):
        A = np.array([[1, 2], [3, 4]])
        B = np.array([[0, 1], [1, 0]])
        expected = np.array([
            [0, 1, 0, 2],
            [1, 0, 2, 0],
            [0, 3, 0, 4],
            [3, 0, 4, 0],
        ])
        np.testing.assert_array_equal(tensor_product(A, B), expected)

    def test_mixed_product_sx_sy(self):
        lhs = tensor_product(SX, SX) @ tensor_product(SY, SY)
        # sx sy = i sz, so the right side is (i sz) (x) (i sz) = -diag(1, -1, -1, 1)
        np.testing.assert_allclose(lhs, -np.diag([1, -1, -1, 1]), atol=1e-15)
        np.testing.assert_allclose(lhs, tensor_product(SX @ SY, SX @ SY), atol=1e-15)

    def test_rectangular(self):
        A = np.ones((2, 3))
        B = np.arange(4).reshape(1, 4)
        out = tensor_product(A, B)
        assert out.shape == (2, 12)
        np.testing.assert_array_equal(out, np.kron(A, B))

    @settings(max_examples=200, deadline=None)
    @given(seeds)
    def test_mixed_product_random(self, seed):
        r = np.random.default_rng(seed)
        A, B, C, D = (r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)) for _ in range(4))
        lhs = tensor_product(A, B) @ tensor_product(C, D)
        assert max_abs(lhs - tensor_product(A @ C, B @ D)) <= 1e-12

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            tensor_product([[np.nan]], I2)


class TestHermitianEigen:
    @pytest.mark.parametrize("M", [SZ, SX, SY])
    def test_pauli_spectra(self, M):
        np.testing.assert_allclose(hermitian_eigen(M).values, [-1, 1], atol=1e-14)

    def test_eta_operator(self):
        eta = sum(tensor_product(P, P) for P in (SX, SY, SZ))
        spec = hermitian_eigen(eta)
        np.testing.assert_allclose(spec.values, [-3, 1, 1, 1], atol=1e-12)
        assert spec.multiplicities() == [(pytest.approx(-3.0), 1), (pytest.approx(1.0), 3)]

    @settings(max_examples=100, deadline=None)
    @given(seeds, st.integers(1, 8))
    def test_reconstruction_and_orthonormality(self, seed, dim):
        M = qmath.random_hermitian(dim, np.random.default_rng(seed))
        spec = hermitian_eigen(M)
        assert max_abs(spec.reconstruct() - M) <= 1e-10
        V = spec.vectors
        assert max_abs(V.conj().T @ V - np.eye(dim)) <= 1e-10
        assert is_unitary(V)
        assert np.all(np.diff(spec.values) >= 0)
        np.testing.assert_allclose(spec.values, np.linalg.eigvalsh(M), atol=1e-10)

    def test_phase_convention(self, rng):
        spec = hermitian_eigen(qmath.random_hermitian(5, rng))
        for v in spec.eigenvectors:
            k = int(np.argmax(np.abs(v)))
            assert abs(v[k].imag) < 1e-12 and v[k].real > 0

    def test_deterministic(self, rng):
        M = qmath.random_hermitian(6, rng)
        a, b = hermitian_eigen(M), hermitian_eigen(M.copy())
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.vectors, b.vectors)

    def test_degenerate_projectors(self, rng):
        U = qmath.random_unitary(4, rng)
        M = U @ np.diag([2.0, 2.0, -1.0, 5.0]) @ U.conj().T
        spec = hermitian_eigen(M)
        np.testing.assert_allclose(spec.values, [-1, 2, 2, 5], atol=1e-10)
        P = spec.vectors[:, 1:3] @ spec.vectors[:, 1:3].conj().T
        P_true = U[:, :2] @ U[:, :2].conj().T
        assert max_abs(P - P_true) <= 1e-10

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            hermitian_eigen(np.array([[0, 1], [0, 0]]))

    def test_not_square(self):
        with pytest.raises(DimensionMismatch):
            hermitian_eigen(np.ones((2, 3)))

    def test_no_convergence(self, monkeypatch, rng):
        monkeypatch.setattr(qmath, "MAX_SWEEPS", 0)
        with pytest.raises(NoConvergence):
            hermitian_eigen(qmath.random_hermitian(4, rng))


class TestUnitaryAndConjugate:
    def test_identity_is_unitary(self):
        assert is_unitary(np.eye(4))

    def test_scaled_identity_is_not(self):
        assert not is_unitary(2 * np.eye(2))

    def test_conjugate_identity(self):
        np.testing.assert_array_equal(conjugate(SZ, I2), SZ)

    def test_conjugate_hadamard(self):
        # H^dagger sz H by hand: (1/2)[[1,1],[1,-1]] diag(1,-1) [[1,1],[1,-1]] = [[0,1],[1,0]]
        np.testing.assert_allclose(conjugate(SZ, HAD), SX, atol=1e-15)

    def test_conjugate_swap(self):
        swap = np.array([[0, 1], [1, 0]])
        np.testing.assert_array_equal(conjugate(np.diag([1, 2]), swap), np.diag([2, 1]))

    def test_conjugate_errors(self):
        with pytest.raises(NotUnitary):
            conjugate(SZ, 2 * I2)
        with pytest.raises(DimensionMismatch):
            conjugate(SZ, np.eye(4))

    @settings(max_examples=100, deadline=None)
    @given(seeds, st.integers(2, 8))
    def test_conjugation_preserves_spectrum(self, seed, dim):
        r = np.random.default_rng(seed)
        A = qmath.random_hermitian(dim, r)
        W = qmath.random_unitary(dim, r)
        a = hermitian_eigen(A).values
        b = hermitian_eigen(conjugate(A, W)).values
        assert np.max(np.abs(a - b)) <= 1e-9
