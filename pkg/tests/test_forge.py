import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import I2, ORACLES, SX, SZ, gauss, seeds
from qms.cp import choi_from_kraus, is_completely_positive
from qms.errors import (
    DimensionError,
    NotHermiticityPreservingError,
    NotPSDError,
    NotUnitalError,
    PhiNotCPError,
    ZeroOperatorError,
)
from qms.examples import OscillatorTruncation, conjugation_generator, dephasing_generator, heat_flow_generator
from qms.forge import (
    associate_vector,
    extract_G,
    extract_phi,
    gram_block,
    gram_matrix,
    lindblad_decompose,
    stinespring_dilate,
    verify_unitality_identity,
)
from qms.linalg import dagger, matrix_unit
from qms.random_ops import random_cp_map, random_hermitian, random_unital_generator
from qms.superop import (
    SuperOperator,
    apply,
    choi_of,
    from_lindblad_terms,
    identity,
    left_mult,
    right_mult,
    sandwich,
    zero,
)

E00 = matrix_unit(2, 0, 0)
DEPHASING = dephasing_generator(SZ)


def random_positive(d, rng):
    z = gauss(rng, d, d)
    return z @ dagger(z) + 0.1 * np.eye(d)


class TestAssociateVector:
    def test_rank_one(self):
        ref = ORACLES["associate"]["diag_2_0"]
        pair = associate_vector(np.diag([2.0, 0.0]))
        np.testing.assert_allclose(pair.h, ref["h"], atol=1e-15)
        assert pair.total == ref["total"]

    def test_half_identity(self):
        ref = ORACLES["associate"]["half_identity"]
        pair = associate_vector(I2 / 2)
        np.testing.assert_allclose(pair.h, ref["h"], atol=1e-15)
        # degenerate eigenvalues: the basis is fixed only up to column order
        cols = sorted(tuple(np.round(c.real, 12)) for c in pair.vectors.T)
        assert cols == sorted(tuple(c) for c in np.asarray(ref["k"]).T)
        assert pair.total == pytest.approx(ref["total"], abs=1e-15)

    def test_zero(self):
        with pytest.raises(ZeroOperatorError):
            associate_vector(np.zeros((2, 2)))

    def test_not_positive(self):
        with pytest.raises(NotPSDError):
            associate_vector(SZ)

    @given(seeds, st.integers(1, 5))
    @settings(max_examples=25)
    def test_invariants(self, seed, d):
        rng = np.random.default_rng(seed)
        t = random_positive(d, rng)
        pair = associate_vector(t)
        assert pair.weights.sum() == pytest.approx(1.0, abs=1e-12)
        # T = sum t_s |k_s><k_s| / total, k_s orthogonal with ||k_s||^2 = total
        rebuilt = (pair.vectors * pair.weights) @ dagger(pair.vectors)
        np.testing.assert_allclose(rebuilt, t, atol=1e-10 * np.linalg.norm(t))
        gram = dagger(pair.vectors) @ pair.vectors
        np.testing.assert_allclose(gram, pair.total * np.eye(gram.shape[0]), atol=1e-10 * pair.total)


class TestExtraction:
    def test_zero_generator(self):
        pair = associate_vector(I2 / 2)
        np.testing.assert_array_equal(extract_G(zero(2), pair), np.zeros((2, 2)))

    def test_dephasing_with_rank_one_T(self):
        g = extract_G(DEPHASING, associate_vector(E00))
        np.testing.assert_allclose(g, np.diag([0.0, -2.0]), atol=1e-15)
        phi = extract_phi(DEPHASING, g)
        w = SZ - I2
        np.testing.assert_allclose(phi.matrix, sandwich(w).matrix, atol=1e-15)

    def test_dephasing_default_T(self):
        g = extract_G(DEPHASING, associate_vector(I2 / 2))
        np.testing.assert_allclose(g, -I2, atol=1e-15)
        np.testing.assert_allclose(extract_phi(DEPHASING, g).matrix, sandwich(SZ).matrix + identity(2).matrix, atol=1e-15)

    def test_conjugation(self, rng):
        g0 = gauss(rng, 3, 3)
        l = conjugation_generator(g0)
        g = extract_G(l, associate_vector(np.eye(3) / 3))
        diff = g - g0
        # G is fixed up to an imaginary multiple of the identity
        c = diff[0, 0]
        assert abs(c.real) < 1e-12
        np.testing.assert_allclose(diff, c * np.eye(3), atol=1e-12)
        np.testing.assert_allclose(extract_phi(l, g).matrix, 0, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            extract_G(DEPHASING, associate_vector(np.eye(3)))
        with pytest.raises(DimensionError):
            extract_phi(DEPHASING, np.eye(3))


class TestLindbladDecompose:
    def test_dephasing(self):
        dec = lindblad_decompose(DEPHASING)
        assert dec.relative_residual < 1e-12
        assert len(dec.kraus) == 2
        assert dec.unitality_residual < 1e-12

    def test_heat_flow_rank_one_T(self):
        d = 8
        osc = OscillatorTruncation(d)
        t = np.zeros((d, d))
        t[0, 0] = 1.0
        dec = lindblad_decompose(heat_flow_generator(d), t)
        expected = choi_from_kraus([np.sqrt(2) * osc.P, np.sqrt(2) * osc.Q])
        np.testing.assert_allclose(choi_of(dec.phi).matrix, expected.matrix, atol=1e-9)
        assert len(dec.kraus) == 2

    def test_rejects_non_hermiticity_preserving(self):
        with pytest.raises(NotHermiticityPreservingError):
            lindblad_decompose(left_mult(np.diag([1j, 0])) + 0.0 * identity(2) + SuperOperator(1j * np.eye(4)))

    def test_rejects_non_generator(self):
        with pytest.raises(PhiNotCPError):
            lindblad_decompose(-1.0 * sandwich(SZ))

    def test_conjugation_has_no_kraus(self, rng):
        h = random_hermitian(3, rng)
        dec = lindblad_decompose(conjugation_generator(-1j * h))
        assert len(dec.kraus) == 0
        assert dec.residual < 1e-12

    @given(seeds, st.integers(1, 4))
    @settings(max_examples=25)
    def test_reconstruction(self, seed, d):
        rng = np.random.default_rng(seed)
        l = random_unital_generator(d, rng)
        dec = lindblad_decompose(l)
        assert dec.residual <= 1e-9 * max(1.0, l.norm())
        assert dec.phi_min_eigenvalue >= -1e-9 * max(1.0, l.norm())
        assert dec.unitality_residual <= 1e-9 * max(1.0, l.norm())

    @given(seeds, st.integers(2, 4))
    @settings(max_examples=10)
    def test_choice_of_T_is_immaterial(self, seed, d):
        rng = np.random.default_rng(seed)
        l = random_unital_generator(d, rng)
        choices = [np.eye(d) / d, np.diag(np.r_[1.0, np.zeros(d - 1)])] + [random_positive(d, rng) for _ in range(3)]
        for t in choices:
            dec = lindblad_decompose(l, t)
            rebuilt = dec.kraus.superop() + left_mult(dec.G) + right_mult(dagger(dec.G))
            assert np.linalg.norm(rebuilt.matrix - l.matrix) <= 1e-9 * max(1.0, l.norm())
            assert is_completely_positive(dec.phi)


class TestStinespring:
    def test_single_sandwich(self):
        w = SZ - I2
        dil = stinespring_dilate(sandwich(w))
        assert dil.multiplicity == 1 and dil.dilation_dim == 2
        for a in (I2, SX, E00):
            np.testing.assert_allclose(dil.compress(a), dagger(w) @ a @ w, atol=1e-14)

    def test_zero_map(self):
        dil = stinespring_dilate(zero(2))
        assert dil.dilation_dim == 0
        assert dil.minimality_rank() == 0

    def test_identity_map_is_isometric(self):
        dil = stinespring_dilate(identity(3))
        assert dil.dilation_dim == 3
        np.testing.assert_allclose(dagger(dil.V) @ dil.V, np.eye(3), atol=1e-14)

    def test_gram_block_matches_full_matrix(self, rng):
        phi = random_cp_map(2, rng)
        full = gram_matrix(phi)
        d = 2
        for p in range(d):
            block = full[p * d * d:(p + 1) * d * d, p * d * d:(p + 1) * d * d]
            np.testing.assert_allclose(block, gram_block(phi, p), atol=1e-14)
        assert np.linalg.eigvalsh(0.5 * (full + dagger(full)))[0] >= -1e-12

    @given(seeds, st.integers(1, 4))
    @settings(max_examples=25)
    def test_dilation_invariants(self, seed, d):
        rng = np.random.default_rng(seed)
        phi = random_cp_map(d, rng)
        dil = stinespring_dilate(phi)
        scale = max(1.0, phi.norm())
        a, b = gauss(rng, d, d), gauss(rng, d, d)
        np.testing.assert_allclose(dil.compress(a), apply(phi, a), atol=1e-9 * scale * np.linalg.norm(a))
        np.testing.assert_allclose(dil.pi(np.eye(d)), np.eye(dil.dilation_dim))
        np.testing.assert_allclose(dil.pi(a @ b), dil.pi(a) @ dil.pi(b), atol=1e-12 * np.linalg.norm(a) * np.linalg.norm(b))
        np.testing.assert_allclose(dil.pi(dagger(a)), dagger(dil.pi(a)))
        assert np.linalg.norm(dil.pi(a), 2) <= np.linalg.norm(a, 2) * (1 + 1e-12)
        assert dil.minimality_rank() == dil.dilation_dim

    @given(seeds, st.integers(1, 4))
    @settings(max_examples=20)
    def test_kraus_count_matches_multiplicity(self, seed, d):
        rng = np.random.default_rng(seed)
        l = random_unital_generator(d, rng)
        dec = lindblad_decompose(l)
        dil = stinespring_dilate(dec.phi, scale=max(1.0, l.norm()))
        assert dil.multiplicity == len(dec.kraus)
        ident = verify_unitality_identity(dec, dil)
        assert ident.passed

    def test_unitality_identity_requires_unital_generator(self):
        l = from_lindblad_terms_nonunital()
        dec = lindblad_decompose(l)
        with pytest.raises(NotUnitalError):
            verify_unitality_identity(dec, stinespring_dilate(dec.phi))


def from_lindblad_terms_nonunital():
    from qms.superop import LindbladTerms

    return from_lindblad_terms(LindbladTerms(-0.1 * I2, (SX,)))
