"""Dense complex operator algebra on C^d.

Operators are plain ``numpy`` arrays of shape ``(d, d)`` and vectors are 1-d
arrays of length ``d``.  The inner product is conjugate-linear in the first
slot, ``inner(x, y) = sum(conj(x) * y)``, and the rank-one operator
``rank_one(x, y)`` is ``h -> inner(y, h) * x``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import AccuracyError, DimensionError, NotHermitianError

DEFAULT_TOL = 1e-10

# Beyond this norm exp(A) may overflow double precision.
EXPM_MAX_NORM = 700.0


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_operator(a, dim: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise DimensionError(f"expected a {dim}x{dim} matrix, got {a.shape[0]}x{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def as_vector(x, dim: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionError(f"expected length {dim}, got {x.shape[0]}")
    return x


def dagger(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).conj().T


def inner(x, y) -> complex:
    """<x, y>, conjugate-linear in ``x``."""
    return complex(np.vdot(x, y))


def op_norm(a) -> float:
    """Operator norm (largest singular value)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def fro_norm(a) -> float:
    """Frobenius (Hilbert-Schmidt) norm."""
    return float(np.linalg.norm(np.asarray(a)))


def basis_vector(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def matrix_unit(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


def rank_one(x, y) -> np.ndarray:
    """The operator ``|x><y|``, i.e. ``h -> <y, h> x``.

    Entry ``(i, j)`` is ``x[i] * conj(y[j])``.
    """
    x = as_vector(x)
    y = as_vector(y)
    if x.shape != y.shape:
        raise DimensionError(f"rank_one: dimension mismatch {x.shape[0]} vs {y.shape[0]}")
    return np.outer(x, y.conj())


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(a)
    return fro_norm(a - dagger(a)) <= tol * max(1.0, op_norm(a))


def is_positive_semidefinite(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_operator(a)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    scale = max(1.0, op_norm(a))
    if op_norm(a - dagger(a)) > tol * scale:
        return False
    herm = 0.5 * (a + dagger(a))
    return float(np.linalg.eigvalsh(herm)[0]) >= -tol * scale


def _canonical_cluster_basis(vectors: np.ndarray) -> np.ndarray:
    # Basis of a degenerate eigenspace that depends only on its projector.
    m = vectors.shape[1]
    projector = vectors @ dagger(vectors)
    q, _, _ = scipy.linalg.qr(projector, pivoting=True)
    return q[:, :m]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    out = v * (abs(v[k]) / v[k])
    out[k] = abs(v[k])
    return out


def hermitian_eig(a, tol: float = DEFAULT_TOL) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator with deterministic output.

    Eigenvalues are ascending.  Inside a cluster of eigenvalues closer than
    ``tol * ||A||`` the eigenvectors are replaced by a basis computed from the
    cluster's spectral projector, ordered by the index of each vector's
    largest-magnitude entry.  Every eigenvector is rotated so that this
    entry is real and positive.
    """
    a = as_operator(a)
    norm = op_norm(a)
    if op_norm(a - dagger(a)) > tol * max(norm, np.finfo(float).tiny):
        raise NotHermitianError("hermitian_eig: input is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))

    d = len(w)
    out = np.empty_like(v)
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and w[stop] - w[stop - 1] <= tol * norm:
            stop += 1
        block = v[:, start:stop]
        if stop - start > 1:
            block = _canonical_cluster_basis(block)
        block = np.column_stack([_fix_phase(block[:, i]) for i in range(block.shape[1])])
        lead = np.argmax(np.abs(block), axis=0)
        order = np.argsort(lead, kind="stable")
        out[:, start:stop] = block[:, order]
        start = stop
    return EigenDecomposition(w, out)


def matrix_exp(a, max_norm: float = EXPM_MAX_NORM) -> np.ndarray:
    """exp(A) by scaling and squaring with Pade approximants.

    Raises AccuracyError when ``||A||`` exceeds ``max_norm`` or the result is
    not finite.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix_exp: expected a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise AccuracyError("matrix_exp: non-finite input")
    norm = op_norm(a)
    if norm > max_norm:
        raise AccuracyError(f"matrix_exp: norm {norm:.3g} exceeds {max_norm:.3g}")
    result = scipy.linalg.expm(a)
    if not np.all(np.isfinite(result)):
        raise AccuracyError("matrix_exp: result overflowed")
    return result
