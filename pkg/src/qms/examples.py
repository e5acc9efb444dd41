"""Example generators and independent oracles.

* heat flow ``L = D_P^2 + D_Q^2`` on a truncated harmonic oscillator;
* Brownian dephasing ``L = -1/2 (ad V)^2`` with a Gauss-Hermite oracle;
* conjugation semigroups ``A -> e^{tG} A e^{tG^*}``;
* shift-with-reset maps ``A -> <f, A f> E_n + S^n A S^{*n}`` in discrete time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InternalInconsistencyError, NotHermitianError
from .linalg import as_operator, dagger, is_hermitian, matrix_exp, op_norm
from .superop import (
    LindbladTerms,
    SuperOperator,
    commutator,
    left_mult,
    right_mult,
    sandwich,
)

HEAT_FLOW_IDENTITY_TOL = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
NAMED_OPERATORS = {"pauli_x": PAULI_X, "pauli_y": PAULI_Y, "pauli_z": PAULI_Z}


@dataclass(frozen=True, eq=False)
class OscillatorTruncation:
    """Lowering operator ``a e_k = sqrt(k) e_{k-1}`` and quadratures on C^d."""

    dim: int
    a: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)
    P: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"oscillator truncation needs d >= 2, got {self.dim}")
        k = np.arange(1, self.dim)
        a = np.zeros((self.dim, self.dim), dtype=complex)
        a[k - 1, k] = np.sqrt(k)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "Q", (a + dagger(a)) / np.sqrt(2))
        object.__setattr__(self, "P", (a - dagger(a)) / (1j * np.sqrt(2)))


def derivation(x) -> SuperOperator:
    """``A -> i (X A - A X)``."""
    return 1j * commutator(x)


def heat_flow_expanded(d: int) -> SuperOperator:
    """``2(PAP + QAQ) - (P^2 + Q^2) A - A (P^2 + Q^2)``."""
    osc = OscillatorTruncation(d)
    p, q = osc.P, osc.Q
    k = p @ p + q @ q
    return 2.0 * (sandwich(p) + sandwich(q)) - left_mult(k) - right_mult(k)


def heat_flow_terms(d: int) -> LindbladTerms:
    osc = OscillatorTruncation(d)
    p, q = osc.P, osc.Q
    return LindbladTerms(-(p @ p + q @ q), (np.sqrt(2) * p, np.sqrt(2) * q))


def heat_flow_composed(d: int) -> SuperOperator:
    """``D_P o D_P + D_Q o D_Q`` as a product of superoperator matrices."""
    osc = OscillatorTruncation(d)
    dp, dq = derivation(osc.P), derivation(osc.Q)
    return dp @ dp + dq @ dq


def _ladder_form(d: int) -> np.ndarray:
    # D_P^2 + D_Q^2 = -(ad a ad a* + ad a* ad a), i.e.
    # A -> 2 a A a* + 2 a* A a - N A - A N with N = a a* + a* a (integer diagonal).
    # Products sqrt(k) sqrt(l) are formed as sqrt(k l), so the terms that meet
    # on the identity cancel exactly in floating point.
    k = np.arange(1, d)
    a_sq = np.zeros((d, d))
    a_sq[k - 1, k] = k
    n_diag = np.zeros(d)
    n_diag[:-1] += k
    n_diag[1:] += k
    eye = np.eye(d)
    # vec(a A a*) = kron(conj(a), a) vec(A); all entries here are real.
    sandwiches = np.sqrt(np.kron(a_sq, a_sq)) + np.sqrt(np.kron(a_sq.T, a_sq.T))
    number = np.kron(eye, np.diag(n_diag)) + np.kron(np.diag(n_diag), eye)
    return 2.0 * sandwiches - number


def heat_flow_generator(d: int) -> SuperOperator:
    """Heat flow ``D_P^2 + D_Q^2`` with ``D_X(A) = i(XA - AX)`` on the truncation.

    The returned matrix is assembled in ladder form so that ``L(1) = 0``
    holds exactly; it is checked against both the composed derivations and
    the expanded Lindblad form.
    """
    out = SuperOperator(_ladder_form(d).astype(complex))
    for other in (heat_flow_composed(d), heat_flow_expanded(d)):
        gap = float(np.max(np.abs(out.matrix - other.matrix)))
        if gap > HEAT_FLOW_IDENTITY_TOL:
            raise InternalInconsistencyError(f"heat-flow forms differ by {gap:.3g}")
    return out


def _require_hermitian(v) -> np.ndarray:
    v = as_operator(v)
    if not is_hermitian(v):
        raise NotHermitianError("dephasing: V must be self-adjoint")
    return v


def dephasing_generator(v) -> SuperOperator:
    """``-1/2 (ad V)^2`` with ``(ad V) A = V A - A V``."""
    v = _require_hermitian(v)
    ad = commutator(v)
    return -0.5 * (ad @ ad)


def dephasing_terms(v) -> LindbladTerms:
    v = _require_hermitian(v)
    return LindbladTerms(-0.5 * (v @ v), (v,))


def dephasing_quadrature_oracle(v, t: float, a, nodes: int = 60) -> np.ndarray:
    """Gauss-Hermite estimate of ``E[e^{ixV} A e^{-ixV}]`` for ``x ~ N(0, t)``.

    In the eigenbasis of ``V`` entry ``(j, k)`` picks up the factor
    ``E[exp(i x (l_j - l_k))]``, which is what the quadrature approximates.
    """
    v = _require_hermitian(v)
    a = as_operator(a, v.shape[0])
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if nodes < 20:
        raise ValueError(f"need at least 20 quadrature nodes, got {nodes}")
    lam, u = np.linalg.eigh(0.5 * (v + dagger(v)))
    z, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / np.sqrt(2 * np.pi)
    x = np.sqrt(t) * z
    freq = lam[:, None] - lam[None, :]
    factor = np.einsum("n,njk->jk", w, np.exp(1j * x[:, None, None] * freq[None, :, :]))
    rotated = dagger(u) @ a @ u
    return u @ (factor * rotated) @ dagger(u)


def conjugation_generator(g) -> SuperOperator:
    """``A -> G A + A G^*``, generating ``A -> e^{tG} A e^{tG^*}``."""
    g = as_operator(g)
    return left_mult(g) + right_mult(dagger(g))


def conjugation_semigroup(g, t: float, a) -> np.ndarray:
    g = as_operator(g)
    u = matrix_exp(t * g)
    return u @ as_operator(a, g.shape[0]) @ dagger(u)


@dataclass(frozen=True, eq=False)
class ShiftResetModel:
    """Truncated shift ``S e_k = e_{k+1}`` with reset state ``f_k ~ exp(-k delta)``."""

    dim: int = 64
    delta: float = 0.25
    S: np.ndarray = field(init=False, repr=False)
    f: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        s = np.zeros((self.dim, self.dim))
        s[np.arange(1, self.dim), np.arange(self.dim - 1)] = 1.0
        f = np.exp(-self.delta * np.arange(self.dim))
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "f", f / np.linalg.norm(f))

    def projector(self, n: int) -> np.ndarray:
        """``E_n``, the projector onto ``span{e_0 .. e_{n-1}}``."""
        self._check_steps(n)
        return np.diag((np.arange(self.dim) < n).astype(float))

    def shift_power(self, n: int) -> np.ndarray:
        self._check_steps(n)
        return np.linalg.matrix_power(self.S, n)

    def omega(self, a) -> complex:
        """``<f, A f>``, normalized so that ``omega(1) == 1`` exactly."""
        a = np.asarray(a)
        f = self.f
        num = f @ (a.real @ f) + 1j * (f @ (a.imag @ f))
        return complex(num / (f @ f))

    def apply(self, n: int, a) -> np.ndarray:
        """``phi_n(A) = omega(A) E_n + S^n A S^{*n}``, computed by index shifting."""
        self._check_steps(n)
        a = as_operator(a, self.dim)
        out = np.zeros_like(a)
        out[n:, n:] = a[: self.dim - n, : self.dim - n]
        out[np.arange(n), np.arange(n)] += self.omega(a)
        return out

    def kraus(self, n: int) -> tuple:
        """Heisenberg Kraus operators ``|f><e_j|`` (j < n) and ``S^{*n}``."""
        self._check_steps(n)
        ops = []
        for j in range(n):
            v = np.zeros((self.dim, self.dim), dtype=complex)
            v[:, j] = self.f
            ops.append(v)
        ops.append(dagger(self.shift_power(n)).astype(complex))
        return tuple(ops)

    def tail_bound(self, n: int) -> float:
        """Truncation estimate ``exp(-2 (d - n) delta)``."""
        return float(np.exp(-2.0 * (self.dim - n) * self.delta))

    def _check_steps(self, n: int):
        if n < 0 or n > self.dim:
            raise IndexError(f"step count {n} outside [0, {self.dim}]")


def shift_reset_map(m: ShiftResetModel, n: int) -> SuperOperator:
    """Dense superoperator of ``phi_n``; subject to the dimension cap."""
    m._check_steps(n)
    d = m.dim
    cols = np.empty((d * d, d * d), dtype=complex)
    for k in range(d * d):
        e = np.zeros((d, d), dtype=complex)
        e[k % d, k // d] = 1.0
        cols[:, k] = m.apply(n, e).reshape(-1, order="F")
    return SuperOperator(cols)


def projector_identity_holds(m: ShiftResetModel, k: int, n: int) -> bool:
    """``E_{k+n} == E_k + S^k E_n S^{*k}`` compared bit for bit."""
    if k + n > m.dim:
        raise IndexError("k + n exceeds the dimension")
    sk = m.shift_power(k)
    return bool(np.array_equal(m.projector(k + n), m.projector(k) + sk @ m.projector(n) @ sk.T))


def default_probes(m: ShiftResetModel, support: int) -> list:
    """Matrix units and a dense Hermitian probe supported on indices ``< support``."""
    if support < 1:
        return []
    idx = sorted({0, 1 % support, support // 2, support - 1})
    probes = []
    for i in idx:
        for j in idx:
            e = np.zeros((m.dim, m.dim), dtype=complex)
            e[i, j] = 1.0
            probes.append(e)
    block = np.add.outer(np.arange(support), np.arange(support)) % 7 - 3.0
    dense = np.zeros((m.dim, m.dim), dtype=complex)
    dense[:support, :support] = block + 1j * (block - block.T)
    probes.append(dense / op_norm(dense))
    return probes


@dataclass(frozen=True)
class SemigroupPairResult:
    steps: tuple
    residual: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.bound


def shift_reset_semigroup_check(
    m: ShiftResetModel, pairs, tol_factor: float = 1.0, probes=None
) -> list:
    """``||phi_j(phi_k(A)) - phi_{j+k}(A)||`` against ``tol_factor * tail``.

    A floor of a few ulps per probe norm absorbs roundoff in ``omega``.
    """
    results = []
    for j, k in pairs:
        if j + k > m.dim:
            raise IndexError(f"pair ({j}, {k}) exceeds the dimension")
        ps = default_probes(m, m.dim - (j + k)) if probes is None else probes
        worst = 0.0
        floor = 0.0
        for a in ps:
            r = op_norm(m.apply(j, m.apply(k, a)) - m.apply(j + k, a))
            worst = max(worst, r)
            floor = max(floor, 16 * np.finfo(float).eps * op_norm(a))
        results.append(SemigroupPairResult((j, k), worst, tol_factor * m.tail_bound(j + k) + floor))
    return results


def omega_invariance_residual(m: ShiftResetModel, n: int, probes) -> float:
    """``max |omega(phi_n(A)) - omega(A)|`` over the probes."""
    return max((abs(m.omega(m.apply(n, a)) - m.omega(a)) for a in probes), default=0.0)


def shift_reset_difference_quotient(m: ShiftResetModel, n: int, a) -> np.ndarray:
    """``phi_{n+1}(A) - phi_n(A)``; informational only."""
    return m.apply(n + 1, a) - m.apply(n, a)


def named_operator(name: str, dim: int | None = None) -> np.ndarray:
    if name not in NAMED_OPERATORS:
        raise KeyError(f"unknown operator name {name!r}")
    out = NAMED_OPERATORS[name].copy()
    if dim is not None and dim != out.shape[0]:
        raise DimensionError(f"{name} is 2x2, spec declares dim {dim}")
    return out
