"""Random test objects: unital generators, CP maps, PSD Choi matrices, unitaries."""

from __future__ import annotations

import numpy as np

from .cp import KrausSet
from .linalg import dagger
from .superop import ChoiMatrix, LindbladTerms, SuperOperator, from_lindblad_terms


def _gauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = _gauss(rng, d, d)
    return 0.5 * (z + dagger(z))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-corrected QR."""
    q, r = np.linalg.qr(_gauss(rng, d, d))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_unital_terms(d: int, rng: np.random.Generator, n_kraus: int | None = None) -> LindbladTerms:
    """``G_0 = -iH - 1/2 sum V_j^* V_j`` with Gaussian ``H`` and ``V_j``."""
    if n_kraus is None:
        n_kraus = int(rng.integers(1, 5))
    ops = tuple(_gauss(rng, d, d) for _ in range(n_kraus))
    vv = sum((dagger(v) @ v for v in ops), np.zeros((d, d), dtype=complex))
    return LindbladTerms(-1j * random_hermitian(d, rng) - 0.5 * vv, ops)


def random_unital_generator(d: int, rng: np.random.Generator, n_kraus: int | None = None) -> SuperOperator:
    return from_lindblad_terms(random_unital_terms(d, rng, n_kraus))


def random_kraus(d: int, rng: np.random.Generator, n_kraus: int | None = None) -> KrausSet:
    if n_kraus is None:
        n_kraus = int(rng.integers(1, d * d + 1))
    return KrausSet(d, tuple(_gauss(rng, d, d) for _ in range(n_kraus)))


def random_cp_map(d: int, rng: np.random.Generator, n_kraus: int | None = None) -> SuperOperator:
    return random_kraus(d, rng, n_kraus).superop()


def random_psd_choi(d: int, rng: np.random.Generator, rank: int | None = None) -> ChoiMatrix:
    if rank is None:
        rank = int(rng.integers(1, d * d + 1))
    w = _gauss(rng, d * d, rank)
    return ChoiMatrix(w @ dagger(w))
