"""Complete positivity, conditional complete positivity and Kraus forms.

Kraus operators are stored in the Heisenberg orientation
``T(A) = sum_j V_j^* A V_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import (
    ConstraintViolatedError,
    DimensionError,
    NonRealFormError,
    NotHermiticityPreservingError,
    NotPSDError,
)
from .linalg import (
    DEFAULT_TOL,
    as_operator,
    as_vector,
    dagger,
    hermitian_eig,
    inner,
    matrix_exp,
    matrix_unit,
    op_norm,
    rank_one,
)
from .superop import (
    ChoiMatrix,
    SuperOperator,
    apply,
    choi_of,
    hermiticity_residual,
    is_hermiticity_preserving,
    sandwich,
    zero,
)

DEFAULT_RANK_TOL = 1e-10
# Times at which exp(tL) is checked when the two CCP stages disagree.
ARBITRATION_TIMES = (0.01, 0.1, 1.0)
# Samples drawn when only the spectral stage ran and landed on the boundary.
BOUNDARY_SAMPLES = 64


@dataclass(frozen=True)
class KrausSet:
    dim: int
    operators: tuple = ()

    def __post_init__(self):
        ops = tuple(as_operator(v, self.dim) for v in self.operators)
        if len(ops) > self.dim ** 2:
            raise ValueError(f"{len(ops)} Kraus operators exceed d^2 = {self.dim ** 2}")
        object.__setattr__(self, "operators", ops)

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i):
        return self.operators[i]

    def superop(self) -> SuperOperator:
        out = zero(self.dim)
        for v in self.operators:
            out = out + sandwich(v)
        return out

    def apply(self, a) -> np.ndarray:
        a = as_operator(a, self.dim)
        return sum((dagger(v) @ a @ v for v in self.operators), np.zeros_like(a))


@dataclass(frozen=True)
class CPCertificate:
    passed: bool
    min_eigenvalue: float
    tolerance: float

    def __bool__(self):
        return self.passed


@dataclass(frozen=True, eq=False)
class CcpWitness:
    """A constrained tuple and the value of the conditional-positivity form on it."""

    operators: tuple
    vectors: tuple
    constraint_residual: float
    value: float
    scale: float


@dataclass(frozen=True, eq=False)
class CcpVerdict:
    passed: bool
    spectral_min: float
    spectral_passed: bool
    sampled_min: float | None
    sampled_passed: bool | None
    samples_evaluated: int
    worst_witness: CcpWitness | None
    tolerance: float
    # exp(tL) complete positivity, only computed when the two stages disagree
    arbitration: bool | None = None
    notes: tuple = field(default=())

    def __bool__(self):
        return self.passed


def _require_hermiticity_preserving(s: SuperOperator, tol: float):
    if not is_hermiticity_preserving(s, tol):
        raise NotHermiticityPreservingError(
            f"map is not hermiticity preserving (residual {hermiticity_residual(s):.3g})"
        )


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dagger(m))


def is_completely_positive(s: SuperOperator, tol: float = DEFAULT_TOL) -> CPCertificate:
    """Choi-matrix certificate of complete positivity."""
    _require_hermiticity_preserving(s, tol)
    c = choi_of(s).matrix
    scale = max(1.0, op_norm(c))
    lam = float(np.linalg.eigvalsh(_hermitian_part(c))[0])
    return CPCertificate(lam >= -tol * scale, lam, tol * scale)


def kraus_from_choi(
    c: ChoiMatrix,
    rank_tol: float = DEFAULT_RANK_TOL,
    *,
    scale: float | None = None,
    psd_tol: float | None = None,
) -> KrausSet:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix.

    Eigenvalues above ``rank_tol * s`` are kept, in descending order, where
    ``s = max(||C||, scale)``; pass ``scale`` when ``C`` came out of a
    cancellation and its own norm is roundoff.  Eigenvalues below
    ``-psd_tol * s`` (default ``psd_tol = rank_tol``) raise NotPSDError.  An
    eigenvector ``w`` reshaped row-major to ``M`` gives ``V = conj(M) * sqrt(lam)``.
    """
    d = c.dim
    m = _hermitian_part(c.matrix)
    norm = max(op_norm(m), scale or 0.0)
    if norm == 0.0:
        return KrausSet(d, ())
    psd_tol = rank_tol if psd_tol is None else psd_tol
    eig = hermitian_eig(m)
    if eig.eigenvalues[0] < -psd_tol * norm:
        raise NotPSDError(
            f"Choi matrix has eigenvalue {eig.eigenvalues[0]:.3g} below -{psd_tol:g}*{norm:.3g}",
            float(eig.eigenvalues[0]),
        )
    ops = []
    for lam, w in zip(eig.eigenvalues[::-1], eig.eigenvectors.T[::-1]):
        if lam <= rank_tol * norm:
            break
        ops.append(np.sqrt(lam) * w.reshape(d, d).conj())
    return KrausSet(d, tuple(ops))


def choi_from_kraus(kraus: KrausSet | Sequence, dim: int | None = None) -> ChoiMatrix:
    if not isinstance(kraus, KrausSet):
        ops = [as_operator(v) for v in kraus]
        if dim is None:
            if not ops:
                raise DimensionError("choi_from_kraus: dim required for an empty list")
            dim = ops[0].shape[0]
        kraus = KrausSet(dim, tuple(ops))
    d = kraus.dim
    c = np.zeros((d * d, d * d), dtype=complex)
    for v in kraus:
        w = v.conj().reshape(-1)
        c += np.outer(w, w.conj())
    return ChoiMatrix(c)


def ccp_quadratic_form(l: SuperOperator, operators, vectors, tol: float = DEFAULT_TOL) -> CcpWitness:
    """``sum_ij <u_i, L(A_i^* A_j) u_j>`` on a tuple with ``sum_k A_k u_k = 0``."""
    d = l.dim
    ops = tuple(as_operator(a, d) for a in operators)
    vecs = tuple(as_vector(u, d) for u in vectors)
    if len(ops) != len(vecs):
        raise DimensionError(f"{len(ops)} operators but {len(vecs)} vectors")
    weight = sum(op_norm(a) * np.linalg.norm(u) for a, u in zip(ops, vecs))
    residual = float(np.linalg.norm(sum((a @ u for a, u in zip(ops, vecs)), np.zeros(d, complex))))
    if residual > tol * weight or (weight == 0.0 and residual > 0.0):
        raise ConstraintViolatedError(
            f"sum A_k u_k has norm {residual:.3g}, allowed {tol * weight:.3g}", residual
        )
    value = 0.0j
    for ai, ui in zip(ops, vecs):
        for aj, uj in zip(ops, vecs):
            value += inner(ui, apply(l, dagger(ai) @ aj) @ uj)
    scale = max(1.0, l.norm()) * max(weight, np.finfo(float).tiny) ** 2
    if abs(value.imag) > tol * scale:
        raise NonRealFormError(f"form has imaginary part {value.imag:.3g}")
    return CcpWitness(ops, vecs, residual, float(value.real), scale)


def random_constrained_tuple(d: int, rng: np.random.Generator, n: int | None = None):
    """Draw ``A_1..A_n, u_1..u_n`` with ``sum A_k u_k = 0``.

    The first ``n-1`` pairs are complex Gaussian; the last is completed as
    ``A_n = |v><k|, u_n = h`` with ``v = -sum A_i u_i`` and ``<h, k> = 1``.
    """
    if n is None:
        n = int(rng.integers(2, max(2, d) + 1))

    def gauss(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    ops = [gauss(d, d) for _ in range(n - 1)]
    vecs = [gauss(d) for _ in range(n - 1)]
    v = -sum(a @ u for a, u in zip(ops, vecs))
    h = gauss(d)
    k = h / np.vdot(h, h).real
    ops.append(rank_one(v, k))
    vecs.append(h)
    return ops, vecs


def _omega_complement(d: int) -> np.ndarray:
    omega = np.zeros(d * d, dtype=complex)
    omega[[i * d + i for i in range(d)]] = 1.0 / np.sqrt(d)
    return scipy.linalg.null_space(omega[None, :].conj())


def _spectral_witness(d: int, w: np.ndarray):
    # Choi vector w orthogonal to Omega  ->  tuple A_b = E_0b, u_b[r] = w[b*d + r].
    ops = [matrix_unit(d, 0, b) for b in range(d)]
    vecs = [np.array(w[b * d:(b + 1) * d]) for b in range(d)]
    return ops, vecs


def _semigroup_is_cp(l: SuperOperator, tol: float) -> bool:
    for t in ARBITRATION_TIMES:
        if not is_completely_positive(SuperOperator(matrix_exp(t * l.matrix)), tol):
            return False
    return True


def is_conditionally_completely_positive(
    l: SuperOperator, samples: int = 200, seed: int = 0, tol: float = DEFAULT_TOL
) -> CcpVerdict:
    """Two-stage conditional complete positivity test.

    Stage 1 compresses the Choi matrix of ``L`` to the orthogonal complement
    of the maximally entangled vector and checks it is PSD.  Stage 2 evaluates
    the defining quadratic form on random constrained tuples (and on the tuple
    built from the stage-1 extremal eigenvector).  The verdict requires both.
    Random numbers come from ``numpy.random.default_rng(seed)`` (PCG64).
    """
    if not 0 <= int(seed) < 2 ** 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    _require_hermiticity_preserving(l, tol)
    d = l.dim
    c = choi_of(l).matrix
    scale = max(1.0, op_norm(c))
    basis = _omega_complement(d)
    notes = []
    spectral_vec = None
    if basis.shape[1] == 0:
        spectral_min = 0.0
    else:
        compressed = _hermitian_part(dagger(basis) @ c @ basis)
        w, y = np.linalg.eigh(compressed)
        spectral_min = float(w[0])
        spectral_vec = basis @ y[:, 0]
    spectral_passed = spectral_min >= -tol * scale
    near_boundary = abs(spectral_min) <= 10 * tol * scale

    n_samples = samples
    if n_samples <= 0 and near_boundary:
        n_samples = BOUNDARY_SAMPLES
        notes.append("spectral stage near boundary; sampled stage forced")

    sampled_min = None
    sampled_passed = None
    worst = None
    evaluated = 0
    if n_samples > 0:
        rng = np.random.default_rng(int(seed))
        tuples = []
        if spectral_vec is not None:
            tuples.append(_spectral_witness(d, spectral_vec))
        tuples.extend(random_constrained_tuple(d, rng) for _ in range(n_samples))
        worst_ratio = np.inf
        for ops, vecs in tuples:
            wit = ccp_quadratic_form(l, ops, vecs, tol)
            ratio = wit.value / wit.scale
            if ratio < worst_ratio:
                worst_ratio, worst = ratio, wit
            evaluated += 1
        sampled_min = worst.value
        sampled_passed = bool(worst_ratio >= -tol)

    passed = spectral_passed and (sampled_passed is not False)
    arbitration = None
    if sampled_passed is not None and sampled_passed != spectral_passed:
        arbitration = _semigroup_is_cp(l, tol)
        notes.append("stages disagree; exp(tL) complete positivity recorded")
    return CcpVerdict(
        passed=bool(passed),
        spectral_min=spectral_min,
        spectral_passed=bool(spectral_passed),
        sampled_min=sampled_min,
        sampled_passed=sampled_passed,
        samples_evaluated=evaluated,
        worst_witness=worst,
        tolerance=tol * scale,
        arbitration=arbitration,
        notes=tuple(notes),
    )
