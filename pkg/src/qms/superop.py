"""Superoperators as d^2 x d^2 matrices acting on column-stacked operators.

Conventions (asserted by the test-suite):

* ``vec(A)[i + d*j] == A[i, j]`` (column stacking);
* ``left_mult(B)`` is ``kron(I, B)`` and ``right_mult(B)`` is ``kron(B.T, I)``;
* the Choi matrix of ``S`` has block ``(i, j)`` equal to ``S(E_ij)``, i.e.
  ``choi = sum_ij kron(E_ij, S(E_ij))``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError
from .linalg import DEFAULT_TOL, as_operator, dagger, fro_norm, matrix_unit, op_norm

DEFAULT_MAX_DIM = 32


def max_dim() -> int:
    """Largest Hilbert dimension for dense superoperators (env ``QMS_MAX_DIM``)."""
    value = os.environ.get("QMS_MAX_DIM")
    return int(value) if value else DEFAULT_MAX_DIM


def vec(a) -> np.ndarray:
    return np.asarray(a).reshape(-1, order="F")


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"cannot unvec a vector of length {v.size}")
    return v.reshape(dim, dim, order="F")


def _hilbert_dim(n_rows: int) -> int:
    d = int(round(np.sqrt(n_rows)))
    if d * d != n_rows:
        raise DimensionError(f"superoperator size {n_rows} is not a perfect square")
    return d


@dataclass(frozen=True, eq=False)
class SuperOperator:
    """Linear map on d x d operators, stored as its d^2 x d^2 matrix."""

    matrix: np.ndarray
    check_dim: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"superoperator matrix must be square, got {m.shape}")
        d = _hilbert_dim(m.shape[0])
        if self.check_dim and d > max_dim():
            raise DimensionError(
                f"dimension {d} exceeds the dense cap {max_dim()} (set QMS_MAX_DIM to override)"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("superoperator has non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return _hilbert_dim(self.matrix.shape[0])

    def apply(self, a) -> np.ndarray:
        return apply(self, a)

    __call__ = apply

    def norm(self) -> float:
        """Frobenius norm of the matrix representation."""
        return fro_norm(self.matrix)

    def _coerce(self, other) -> "SuperOperator":
        if not isinstance(other, SuperOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return SuperOperator(self.matrix + other.matrix)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return SuperOperator(self.matrix - other.matrix)

    def __neg__(self):
        return SuperOperator(-self.matrix)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SuperOperator(scalar * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Composition: ``(S @ T)(A) == S(T(A))``."""
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return SuperOperator(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_ij kron(E_ij, S(E_ij))``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"Choi matrix must be square, got {m.shape}")
        _hilbert_dim(m.shape[0])
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return _hilbert_dim(self.matrix.shape[0])

    def block(self, i: int, j: int) -> np.ndarray:
        d = self.dim
        return np.array(self.matrix[i * d:(i + 1) * d, j * d:(j + 1) * d])


@dataclass(frozen=True)
class LindbladTerms:
    """Data of the map ``A -> sum_j V_j^* A V_j + G A + A G^*``."""

    G: np.ndarray
    kraus: tuple = ()

    def __post_init__(self):
        g = as_operator(self.G)
        kraus = tuple(as_operator(v, g.shape[0]) for v in self.kraus)
        object.__setattr__(self, "G", g)
        object.__setattr__(self, "kraus", kraus)

    @property
    def dim(self) -> int:
        return self.G.shape[0]


def apply(s: SuperOperator, a) -> np.ndarray:
    a = as_operator(a)
    if a.shape[0] != s.dim:
        raise DimensionError(f"apply: operator dimension {a.shape[0]} != superoperator dimension {s.dim}")
    return unvec(s.matrix @ vec(a), s.dim)


def identity(d: int) -> SuperOperator:
    return SuperOperator(np.eye(d * d, dtype=complex))


def zero(d: int) -> SuperOperator:
    return SuperOperator(np.zeros((d * d, d * d), dtype=complex))


def left_mult(b) -> SuperOperator:
    """``A -> B A``."""
    b = as_operator(b)
    return SuperOperator(np.kron(np.eye(b.shape[0]), b))


def right_mult(b) -> SuperOperator:
    """``A -> A B``."""
    b = as_operator(b)
    return SuperOperator(np.kron(b.T, np.eye(b.shape[0])))


def sandwich(v) -> SuperOperator:
    """``A -> V^* A V``."""
    v = as_operator(v)
    return SuperOperator(np.kron(v.T, dagger(v)))


def commutator(x) -> SuperOperator:
    """``A -> X A - A X``."""
    x = as_operator(x)
    return left_mult(x) - right_mult(x)


def from_map(fn: Callable[[np.ndarray], np.ndarray], d: int) -> SuperOperator:
    """Matrix of a linear map given as a Python callable on d x d arrays."""
    cols = [vec(fn(matrix_unit(d, k % d, k // d))) for k in range(d * d)]
    return SuperOperator(np.column_stack(cols))


def from_lindblad_terms(terms: LindbladTerms) -> SuperOperator:
    g = terms.G
    out = left_mult(g) + right_mult(dagger(g))
    for v in terms.kraus:
        out = out + sandwich(v)
    return out


def _choi_from_matrix(m: np.ndarray, d: int) -> np.ndarray:
    # m[r + d*s, i + d*j] = S(E_ij)[r, s]  ->  choi[i*d + r, j*d + s]
    t = m.reshape(d, d, d, d)  # axes (s, r, j, i)
    return t.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def choi_of(s: SuperOperator) -> ChoiMatrix:
    return ChoiMatrix(_choi_from_matrix(s.matrix, s.dim))


def choi_to_superop(c: ChoiMatrix) -> SuperOperator:
    d = c.dim
    t = c.matrix.reshape(d, d, d, d)  # axes (i, r, j, s)
    return SuperOperator(t.transpose(3, 1, 2, 0).reshape(d * d, d * d))


def amplify(s: SuperOperator, n: int) -> SuperOperator:
    """The map ``sum_ij kron(A_ij, E_ij) -> sum_ij kron(S(A_ij), E_ij)`` on M_{nd}."""
    if n < 1:
        raise ValueError("amplify: n must be >= 1")
    d = s.dim
    if n == 1:
        return s
    nd = n * d
    images = [apply(s, matrix_unit(d, a, b)) for b in range(d) for a in range(d)]
    cols = np.empty((nd * nd, nd * nd), dtype=complex)
    for q in range(nd):
        b, j = divmod(q, n)
        for p in range(nd):
            a, i = divmod(p, n)
            out = np.kron(images[a + d * b], matrix_unit(n, i, j))
            cols[:, p + nd * q] = vec(out)
    return SuperOperator(cols, check_dim=False)


def hermiticity_residual(s: SuperOperator) -> float:
    """max over matrix units of ``||S(E^*) - S(E)^*||_F``."""
    d = s.dim
    worst = 0.0
    for j in range(d):
        for i in range(d):
            e = matrix_unit(d, i, j)
            worst = max(worst, fro_norm(apply(s, dagger(e)) - dagger(apply(s, e))))
    return worst


def is_hermiticity_preserving(s: SuperOperator, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return hermiticity_residual(s) <= tol * max(1.0, s.norm())


def unitality_residual(s: SuperOperator, mode: str) -> float:
    """``||S(1) - 1||`` for ``mode="semigroup"``, ``||S(1)||`` for ``mode="generator"``."""
    out = apply(s, np.eye(s.dim))
    if mode == "semigroup":
        out = out - np.eye(s.dim)
    elif mode != "generator":
        raise ValueError(f"mode must be 'semigroup' or 'generator', got {mode!r}")
    return op_norm(out)


def is_unital(s: SuperOperator, tol: float = DEFAULT_TOL, *, mode: str) -> bool:
    return unitality_residual(s, mode) <= tol * s.dim
