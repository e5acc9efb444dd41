import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import I2, SX, SZ, gauss, seeds
from qms.errors import DimensionError
from qms.linalg import dagger, matrix_unit
from qms.superop import (
    ChoiMatrix,
    LindbladTerms,
    SuperOperator,
    amplify,
    apply,
    choi_of,
    choi_to_superop,
    from_lindblad_terms,
    from_map,
    identity,
    is_hermiticity_preserving,
    is_unital,
    left_mult,
    max_dim,
    right_mult,
    sandwich,
    unvec,
    vec,
    zero,
)


def transpose_map(d=2):
    return from_map(lambda a: a.T, d)


def test_vec_is_column_stacking():
    a = np.arange(9).reshape(3, 3)
    v = vec(a)
    for i in range(3):
        for j in range(3):
            assert v[i + 3 * j] == a[i, j]
    np.testing.assert_array_equal(unvec(v), a)


def test_left_right_kron_convention():
    b = np.arange(4).reshape(2, 2) + 1j
    np.testing.assert_array_equal(left_mult(b).matrix, np.kron(np.eye(2), b))
    np.testing.assert_array_equal(right_mult(b).matrix, np.kron(b.T, np.eye(2)))


class TestApply:
    def test_identity(self, rng):
        a = gauss(rng, 3, 3)
        np.testing.assert_array_equal(apply(identity(3), a), a)

    def test_left_multiplication(self):
        np.testing.assert_array_equal(apply(left_mult(np.diag([1, -1])), I2), np.diag([1, -1]))

    def test_sandwich_pauli(self):
        s = from_lindblad_terms(LindbladTerms(np.zeros((2, 2)), (SZ,)))
        np.testing.assert_allclose(apply(s, SX), -SX)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            apply(identity(2), np.eye(3))

    @given(seeds, st.integers(1, 5))
    def test_linearity(self, seed, d):
        rng = np.random.default_rng(seed)
        s = SuperOperator(gauss(rng, d * d, d * d))
        a, b = gauss(rng, d, d), gauss(rng, d, d)
        alpha, beta = gauss(rng, 2)
        lhs = apply(s, alpha * a + beta * b)
        rhs = alpha * apply(s, a) + beta * apply(s, b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))

    @given(seeds, st.integers(1, 6))
    def test_left_right_action(self, seed, d):
        rng = np.random.default_rng(seed)
        a, b = gauss(rng, d, d), gauss(rng, d, d)
        np.testing.assert_allclose(apply(left_mult(b), a), b @ a, atol=1e-13)
        np.testing.assert_allclose(apply(right_mult(b), a), a @ b, atol=1e-13)
        np.testing.assert_allclose(apply(sandwich(b), a), dagger(b) @ a @ b, atol=1e-12)


class TestLindbladTerms:
    def test_empty(self):
        s = from_lindblad_terms(LindbladTerms(np.zeros((2, 2)), ()))
        np.testing.assert_array_equal(s.matrix, zero(2).matrix)

    def test_dephasing_terms(self):
        s = from_lindblad_terms(LindbladTerms(-0.5 * I2, (SZ,)))
        np.testing.assert_allclose(apply(s, SX), -2 * SX)
        np.testing.assert_allclose(apply(s, I2), 0 * I2, atol=0)

    def test_conjugation_form(self, rng):
        g = gauss(rng, 3, 3)
        a = gauss(rng, 3, 3)
        s = from_lindblad_terms(LindbladTerms(g, ()))
        np.testing.assert_allclose(apply(s, a), g @ a + a @ dagger(g), atol=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            LindbladTerms(np.eye(2), (np.eye(3),))

    @given(seeds)
    def test_linear_in_G_and_additive_in_kraus(self, seed):
        rng = np.random.default_rng(seed)
        g1, g2 = gauss(rng, 3, 3), gauss(rng, 3, 3)
        k1 = tuple(gauss(rng, 3, 3) for _ in range(2))
        k2 = tuple(gauss(rng, 3, 3) for _ in range(2))
        whole = from_lindblad_terms(LindbladTerms(g1 + g2, k1 + k2)).matrix
        parts = (
            from_lindblad_terms(LindbladTerms(g1, k1)).matrix
            + from_lindblad_terms(LindbladTerms(g2, k2)).matrix
        )
        assert np.max(np.abs(whole - parts)) <= 1e-12 * max(1.0, np.max(np.abs(whole)))


class TestChoi:
    def test_identity_map(self):
        c = choi_of(identity(2)).matrix
        omega = np.zeros(4)
        omega[[0, 3]] = 1
        np.testing.assert_array_equal(c, np.outer(omega, omega))
        assert np.trace(c).real == 2

    def test_pauli_sandwich_rank_one(self):
        c = choi_of(sandwich(SZ)).matrix
        w = np.linalg.eigvalsh(c)
        np.testing.assert_allclose(w, [0, 0, 0, 2], atol=1e-14)

    def test_trace_and_replace(self):
        s = from_map(lambda a: np.trace(a) * np.eye(2) / 2, 2)
        np.testing.assert_allclose(choi_of(s).matrix, np.eye(4) / 2)

    def test_blocks_are_images(self, rng):
        s = SuperOperator(gauss(rng, 9, 9))
        c = choi_of(s)
        for i in range(3):
            for j in range(3):
                np.testing.assert_array_equal(c.block(i, j), apply(s, matrix_unit(3, i, j)))

    @given(seeds, st.integers(1, 8))
    def test_round_trip(self, seed, d):
        rng = np.random.default_rng(seed)
        s = SuperOperator(gauss(rng, d * d, d * d))
        back = choi_to_superop(choi_of(s)).matrix
        assert np.max(np.abs(back - s.matrix)) <= 1e-12

    def test_choi_rejects_non_square(self):
        with pytest.raises(DimensionError):
            ChoiMatrix(np.zeros((3, 3)))


class TestAmplify:
    def test_n_one(self, rng):
        s = SuperOperator(gauss(rng, 4, 4))
        np.testing.assert_array_equal(amplify(s, 1).matrix, s.matrix)

    def test_identity(self):
        np.testing.assert_array_equal(amplify(identity(2), 3).matrix, np.eye(36))

    def test_transpose_not_two_positive(self):
        omega = np.zeros(4)
        omega[[0, 3]] = 1
        projector = np.outer(omega, omega)  # PSD on C^2 (x) C^2
        out = apply(amplify(transpose_map(), 2), projector)
        assert np.linalg.eigvalsh(out)[0] < -0.5

    @given(seeds, st.integers(1, 4), st.integers(1, 3))
    def test_blockwise_action(self, seed, d, n):
        rng = np.random.default_rng(seed)
        s = SuperOperator(gauss(rng, d * d, d * d))
        amp = amplify(s, n)
        for i in range(n):
            for j in range(n):
                for p in range(d):
                    for q in range(d):
                        a = matrix_unit(d, p, q)
                        got = apply(amp, np.kron(a, matrix_unit(n, i, j)))
                        np.testing.assert_array_equal(got, np.kron(apply(s, a), matrix_unit(n, i, j)))


class TestHermiticityAndUnitality:
    def test_lindblad_form_preserves_hermiticity(self, rng):
        terms = LindbladTerms(gauss(rng, 3, 3), tuple(gauss(rng, 3, 3) for _ in range(2)))
        assert is_hermiticity_preserving(from_lindblad_terms(terms))

    def test_multiplication_by_i(self):
        assert not is_hermiticity_preserving(1j * identity(2))

    def test_two_sided_product(self, rng):
        n = gauss(rng, 3, 3)
        assert is_hermiticity_preserving(from_map(lambda a: n @ a @ dagger(n), 3))

    def test_identity_semigroup_mode(self):
        assert is_unital(identity(3), mode="semigroup")

    def test_unital_generator(self):
        assert is_unital(from_lindblad_terms(LindbladTerms(-0.5 * I2, (SZ,))), mode="generator")

    def test_non_unital_generator(self):
        assert not is_unital(from_lindblad_terms(LindbladTerms(np.zeros((2, 2)), (SZ,))), mode="generator")

    def test_mode_required(self):
        with pytest.raises(ValueError):
            is_unital(identity(2), mode="other")


class TestSuperOperatorValue:
    def test_read_only(self):
        s = identity(2)
        with pytest.raises(ValueError):
            s.matrix[0, 0] = 2

    def test_input_copied(self):
        m = np.eye(4, dtype=complex)
        s = SuperOperator(m)
        m[0, 0] = 5
        assert s.matrix[0, 0] == 1

    def test_dimension_cap(self, monkeypatch):
        monkeypatch.setenv("QMS_MAX_DIM", "2")
        assert max_dim() == 2
        with pytest.raises(DimensionError):
            identity(3)

    def test_not_square_hilbert(self):
        with pytest.raises(DimensionError):
            SuperOperator(np.eye(3))

    def test_composition(self, rng):
        s, t = SuperOperator(gauss(rng, 4, 4)), SuperOperator(gauss(rng, 4, 4))
        a = gauss(rng, 2, 2)
        np.testing.assert_allclose(apply(s @ t, a), apply(s, apply(t, a)), atol=1e-13)
