"""Constructive Lindblad decomposition and Stinespring dilation of generators.

Given a generator ``L`` and a positive operator ``T`` with associate vector
``h``, the operator

    G x = L(|x><T h|) h - 1/2 <h, L(T) h> x

splits ``L`` as ``L(A) = phi(A) + G A + A G^*`` with ``phi`` completely
positive whenever ``L`` is conditionally completely positive.  ``phi`` is
then dilated as ``phi(A) = V^* pi(A) V`` through the Gram form
``(A (x) u, B (x) v) = <u, phi(A^* B) v>`` on ``M_d (x) C^d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cp import KrausSet, is_completely_positive, kraus_from_choi
from .errors import (
    DimensionError,
    GramNotPSDError,
    NotHermiticityPreservingError,
    NotPSDError,
    NotUnitalError,
    PhiNotCPError,
    ZeroOperatorError,
)
from .linalg import (
    DEFAULT_TOL,
    as_operator,
    basis_vector,
    dagger,
    fro_norm,
    hermitian_eig,
    inner,
    is_positive_semidefinite,
    matrix_unit,
    op_norm,
    rank_one,
)
from .superop import (
    SuperOperator,
    apply,
    choi_of,
    hermiticity_residual,
    is_hermiticity_preserving,
    is_unital,
    left_mult,
    right_mult,
    unitality_residual,
    vec,
)

DEFAULT_DECOMPOSE_TOL = 1e-8
DEFAULT_GRAM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AssociatePair:
    """``T = sum_s t_s |k_s><k_s|`` with ``sum t_s = 1`` and ``h = sum k_s / ||k_s||^2``.

    ``vectors`` holds the ``k_s`` as columns.
    """

    T: np.ndarray
    h: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray
    total: float

    @property
    def Th(self) -> np.ndarray:
        return self.T @ self.h


def associate_vector(t, rank_tol: float = DEFAULT_TOL) -> AssociatePair:
    t = as_operator(t)
    norm = op_norm(t)
    if norm == 0.0:
        raise ZeroOperatorError("associate_vector: T is the zero operator")
    if not is_positive_semidefinite(t, rank_tol):
        lam = float(np.linalg.eigvalsh(0.5 * (t + dagger(t)))[0])
        raise NotPSDError(f"associate_vector: T is not positive (min eigenvalue {lam:.3g})", lam)
    eig = hermitian_eig(0.5 * (t + dagger(t)))
    keep = eig.eigenvalues > rank_tol * norm
    primed_weights = eig.eigenvalues[keep][::-1]
    primed_vectors = eig.eigenvectors[:, keep][:, ::-1]
    total = float(primed_weights.sum())
    weights = primed_weights / total
    vectors = np.sqrt(total) * primed_vectors
    h = (vectors / np.sum(np.abs(vectors) ** 2, axis=0)).sum(axis=1)
    return AssociatePair(t, h, vectors, weights, total)


def extract_G(l: SuperOperator, pair: AssociatePair) -> np.ndarray:
    d = l.dim
    if pair.T.shape[0] != d:
        raise DimensionError(f"extract_G: T has dimension {pair.T.shape[0]}, L has {d}")
    h, th = pair.h, pair.Th
    shift = 0.5 * inner(h, apply(l, pair.T) @ h)
    g = np.empty((d, d), dtype=complex)
    for i in range(d):
        e = basis_vector(d, i)
        g[:, i] = apply(l, rank_one(e, th)) @ h - shift * e
    return g


def extract_phi(l: SuperOperator, g) -> SuperOperator:
    g = as_operator(g)
    if g.shape[0] != l.dim:
        raise DimensionError(f"extract_phi: G has dimension {g.shape[0]}, L has {l.dim}")
    return l - left_mult(g) - right_mult(dagger(g))


@dataclass(frozen=True, eq=False)
class LindbladDecomposition:
    source: SuperOperator
    pair: AssociatePair
    G: np.ndarray
    phi: SuperOperator
    kraus: KrausSet
    # ||L - (sum_j V_j^* . V_j + G . + . G^*)||_F using the Kraus set
    residual: float
    phi_min_eigenvalue: float
    # ||phi(1) + G + G^*||, meaningful when L(1) = 0
    unitality_residual: float

    @property
    def relative_residual(self) -> float:
        return self.residual / max(self.source.norm(), np.finfo(float).tiny)


def lindblad_decompose(
    l: SuperOperator,
    t=None,
    tol: float = DEFAULT_DECOMPOSE_TOL,
    rank_tol: float = DEFAULT_TOL,
) -> LindbladDecomposition:
    """Split ``L`` into ``phi + G . + . G^*`` with ``phi`` certified CP.

    ``t`` defaults to ``I/d``.
    """
    d = l.dim
    if not is_hermiticity_preserving(l, tol):
        raise NotHermiticityPreservingError(
            f"lindblad_decompose: L is not hermiticity preserving "
            f"(residual {hermiticity_residual(l):.3g})"
        )
    t = np.eye(d, dtype=complex) / d if t is None else as_operator(t, d)
    pair = associate_vector(t, rank_tol)
    g = extract_G(l, pair)
    phi = extract_phi(l, g)
    cert = is_completely_positive(phi, tol)
    if not cert:
        raise PhiNotCPError(
            f"extracted phi is not completely positive (min Choi eigenvalue "
            f"{cert.min_eigenvalue:.3g}); L is not a QMS generator or tol is too tight",
            cert.min_eigenvalue,
        )
    # phi = L - G. - .G^* is a cancellation, so thresholds are relative to ||L||
    scale = max(1.0, l.norm())
    kraus = kraus_from_choi(choi_of(phi), rank_tol, scale=scale, psd_tol=cert.tolerance / scale)
    rebuilt = kraus.superop() + left_mult(g) + right_mult(dagger(g))
    residual = fro_norm(l.matrix - rebuilt.matrix)
    unital = op_norm(apply(phi, np.eye(d)) + g + dagger(g))
    return LindbladDecomposition(l, pair, g, phi, kraus, residual, cert.min_eigenvalue, unital)


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    """``phi(A) = V^* pi(A) V`` with ``pi(A) = A (x) I_r`` on ``C^k``, ``k = d r``.

    Coordinates on ``C^k`` are indexed ``p * r + s`` where ``p`` labels the
    left factor of ``E_pq (x) e_r`` and ``s`` the retained Gram eigenvector.
    """

    dim: int
    dilation_dim: int
    multiplicity: int
    V: np.ndarray
    gram_eigenvalues: np.ndarray
    gram_rank: int

    def pi(self, a) -> np.ndarray:
        a = as_operator(a, self.dim)
        return np.kron(a, np.eye(self.multiplicity))

    def pi_matrix(self) -> np.ndarray:
        """The d^2 x k^2 matrix with ``vec(pi(A)) = pi_matrix @ vec(A)``."""
        d = self.dim
        cols = [vec(self.pi(matrix_unit(d, k % d, k // d))) for k in range(d * d)]
        return np.column_stack(cols) if cols else np.zeros((0, 0), dtype=complex)

    def compress(self, a) -> np.ndarray:
        """``V^* pi(A) V``."""
        return dagger(self.V) @ self.pi(a) @ self.V

    def minimality_rank(self, tol: float = DEFAULT_TOL) -> int:
        """Rank of ``{pi(E_pq) V e_r}``; equals ``dilation_dim`` for a minimal dilation."""
        d, k = self.dim, self.dilation_dim
        if k == 0:
            return 0
        cols = [self.pi(matrix_unit(d, p, q)) @ self.V for p in range(d) for q in range(d)]
        span = np.hstack(cols)
        sv = np.linalg.svd(span, compute_uv=False)
        return int(np.sum(sv > tol * max(1.0, sv[0])))


def gram_block(phi: SuperOperator, p: int = 0) -> np.ndarray:
    """Diagonal block ``p`` of the Gram matrix on ``M_d (x) C^d``.

    Entry ``[(q, r), (q', r')]`` is ``<e_r, phi(E_pq^* E_pq') e_r'>``.  Blocks
    with ``p != p'`` vanish because ``E_pq^* E_p'q' = 0``, and the diagonal
    block does not depend on ``p``.
    """
    d = phi.dim
    out = np.empty((d * d, d * d), dtype=complex)
    for q in range(d):
        for q2 in range(d):
            a = dagger(matrix_unit(d, p, q)) @ matrix_unit(d, p, q2)
            out[q * d:(q + 1) * d, q2 * d:(q2 + 1) * d] = apply(phi, a)
    return out


def gram_matrix(phi: SuperOperator) -> np.ndarray:
    """Full d^3 x d^3 Gram matrix, basis ``E_pq (x) e_r`` in (p, q, r) order."""
    d = phi.dim
    n = d ** 3
    out = np.zeros((n, n), dtype=complex)
    for p in range(d):
        for q in range(d):
            for p2 in range(d):
                for q2 in range(d):
                    a = dagger(matrix_unit(d, p, q)) @ matrix_unit(d, p2, q2)
                    row = (p * d + q) * d
                    col = (p2 * d + q2) * d
                    out[row:row + d, col:col + d] = apply(phi, a)
    return out


def stinespring_dilate(
    phi: SuperOperator, gram_tol: float = DEFAULT_GRAM_TOL, scale: float | None = None
) -> StinespringDilation:
    """Minimal Stinespring dilation from the Gram form of ``phi``.

    Discarding Gram eigenvalues below ``gram_tol * ||Gram||`` is the quotient
    by the null space; the retained eigenvectors give orthonormal coordinates
    on the dilation space.  Left multiplication commutes with the Gram
    matrix, so in these coordinates ``pi(A) = A (x) I_r``.  Thresholds are
    relative to ``max(||Gram||, scale)``; pass ``scale`` when ``phi`` is the
    result of a cancellation.
    """
    d = phi.dim
    block = gram_block(phi)
    block = 0.5 * (block + dagger(block))
    norm = max(op_norm(block), scale or 0.0)
    if norm == 0.0:
        return StinespringDilation(d, 0, 0, np.zeros((0, d), dtype=complex), np.zeros(0), 0)
    eig = hermitian_eig(block)
    if eig.eigenvalues[0] < -gram_tol * norm:
        raise GramNotPSDError(
            f"Gram form is not positive (min eigenvalue {eig.eigenvalues[0]:.3g}); "
            "phi is not completely positive",
            float(eig.eigenvalues[0]),
        )
    lam = eig.eigenvalues[::-1]
    w = eig.eigenvectors[:, ::-1]
    r = int(np.sum(lam > gram_tol * norm))
    lam, w = lam[:r], w[:, :r]
    # V[(p, s), r'] = sqrt(lam_s) * conj(w_s[(p, r')]): the image of 1 (x) e_r'.
    v = np.empty((d * r, d), dtype=complex)
    for p in range(d):
        v[p * r:(p + 1) * r, :] = (np.sqrt(lam)[:, None] * w[p * d:(p + 1) * d, :].T.conj())
    return StinespringDilation(d, d * r, r, v, lam, d * r)


@dataclass(frozen=True)
class UnitalityIdentity:
    """Residuals of ``phi(1) = -(G + G^*)`` through the dilation and the Kraus set."""

    residual: float
    kraus_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance and self.kraus_residual <= self.tolerance


def verify_unitality_identity(
    dec: LindbladDecomposition, dil: StinespringDilation, tol: float = DEFAULT_DECOMPOSE_TOL
) -> UnitalityIdentity:
    l = dec.source
    if not is_unital(l, tol, mode="generator"):
        raise NotUnitalError(
            f"source generator has ||L(1)|| = {unitality_residual(l, 'generator'):.3g}"
        )
    g = dec.G
    d = l.dim
    vv = dagger(dil.V) @ dil.V if dil.dilation_dim else np.zeros((d, d), dtype=complex)
    kk = sum((dagger(v) @ v for v in dec.kraus), np.zeros((d, d), dtype=complex))
    return UnitalityIdentity(
        residual=op_norm(vv + g + dagger(g)),
        kraus_residual=op_norm(kk + g + dagger(g)),
        tolerance=tol,
    )
