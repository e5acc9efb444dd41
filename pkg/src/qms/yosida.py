"""Resolvents, Yosida approximants and semigroup diagnostics.

For a generator ``L`` and ``eps > 0`` the resolvent is ``R = (1 - eps L)^-1``
and the Yosida approximant is

    L_eps = L R = -(1/eps) (1 - R),

a bounded generator whose semigroup ``exp(t L_eps)`` is completely positive,
unital and contractive.  ``yosida_report`` checks those properties on a grid
and follows the extracted operators ``G_eps`` as ``eps -> 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cp import is_completely_positive
from .errors import InternalInconsistencyError, SingularResolventError
from .forge import AssociatePair, extract_G
from .linalg import DEFAULT_TOL, as_operator, fro_norm, matrix_exp, op_norm
from .superop import SuperOperator, amplify, apply, unitality_residual

DEFAULT_EPS_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
DEFAULT_T_GRID = (0.01, 0.1, 1.0)
MAX_RESOLVENT_COND = 1e12
CP_TOL = 1e-8
UNITAL_TOL = 1e-8
PROBE_SLACK = 1e-9
RESOLVENT_SLACK = 1e-10
CAUCHY_GAP_TOL = 1e-6


def resolvent(l: SuperOperator, eps: float) -> SuperOperator:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = l.matrix.shape[0]
    m = np.eye(n) - eps * l.matrix
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond > MAX_RESOLVENT_COND:
        raise SingularResolventError(
            f"1 - eps*L is numerically singular (condition number {cond:.3g}); "
            "L is not a generator or eps is pathological",
            cond,
        )
    return SuperOperator(np.linalg.solve(m, np.eye(n)), check_dim=False)


def _yosida_forms(l: SuperOperator, eps: float):
    """Difference form, its distance to ``L R``, and the allowed distance floor.

    ``1 - R`` cancels to ``O(eps)``, so the difference form carries an
    absolute error of about ``n u ||R|| / eps``; the floor accounts for it.
    """
    r = resolvent(l, eps).matrix
    n = r.shape[0]
    product = l.matrix @ r
    difference = -(np.eye(n) - r) / eps
    floor = 4 * n * np.finfo(float).eps * (np.sqrt(n) + fro_norm(r)) / eps
    return difference, fro_norm(product - difference), floor


def yosida_generator(l: SuperOperator, eps: float, tol: float = DEFAULT_TOL) -> SuperOperator:
    """``L_eps`` in the form ``-(1/eps)(1 - R)``, cross-checked against ``L R``."""
    out, gap, floor = _yosida_forms(l, eps)
    if gap > tol * max(1.0, fro_norm(out)) + floor:
        raise InternalInconsistencyError(
            f"L R and -(1/eps)(1 - R) differ by {gap:.3g} at eps={eps:g}"
        )
    return SuperOperator(out, check_dim=False)


def semigroup_at(l: SuperOperator, t: float) -> SuperOperator:
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return SuperOperator(matrix_exp(t * l.matrix), check_dim=False)


def _polar_unitary(w: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(w)
    return u @ vh


def map_norm_estimate(
    s: SuperOperator, amplification: int = 2, iters: int = 60, restarts: int = 4, seed: int = 0
) -> float:
    """Lower estimate of ``sup ||S(X)|| / ||X||`` (operator norms) on ``M_n (x) M_d``.

    Power-type ascent over unitaries, which are the extreme points of the
    unit ball: ``X -> polar(S^dagger(|u><v|))`` where ``u, v`` are the top
    singular vectors of ``S(X)``.
    """
    amp = amplify(s, amplification) if amplification > 1 else s
    m = amp.matrix
    adj = m.conj().T
    n = amp.dim
    rng = np.random.default_rng(seed)
    best = 0.0
    starts = [np.eye(n, dtype=complex)]
    for _ in range(restarts):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        starts.append(_polar_unitary(z))
    for x in starts:
        for _ in range(iters):
            y = (m @ x.reshape(-1, order="F")).reshape(n, n, order="F")
            uu, sv, vh = np.linalg.svd(y)
            best = max(best, float(sv[0]))
            functional = np.outer(uu[:, 0], vh[0, :])
            w = (adj @ functional.reshape(-1, order="F")).reshape(n, n, order="F")
            x = _polar_unitary(w)
    return best


@dataclass
class YosidaEntry:
    eps: float
    consistency_gap: float
    probe_residuals: list
    probe_bounds: list
    resolvent_residuals: list
    resolvent_bounds: list
    cp_min_eigenvalues: list
    unital_residuals: list
    G: np.ndarray = field(repr=False)
    gap_to_smallest: float = 0.0
    gap_to_limit: float = 0.0
    consistency_bound: float = 0.0

    @property
    def probes_ok(self) -> bool:
        return all(r <= b for r, b in zip(self.probe_residuals, self.probe_bounds))

    @property
    def resolvent_ok(self) -> bool:
        return all(r <= b for r, b in zip(self.resolvent_residuals, self.resolvent_bounds))

    @property
    def cp_ok(self) -> bool:
        return all(ok for _, ok in self.cp_min_eigenvalues)

    @property
    def unital_ok(self) -> bool:
        return all(r <= UNITAL_TOL for r in self.unital_residuals)


@dataclass
class YosidaReport:
    eps_grid: tuple
    t_grid: tuple
    entries: list
    G_limit: np.ndarray = field(repr=False)
    G_extrapolated: np.ndarray = field(repr=False)
    cauchy_gap: float
    cauchy_tol: float
    monotone: bool
    consistency_tol: float
    failures: list

    @property
    def cauchy_ok(self) -> bool:
        return self.cauchy_gap <= self.cauchy_tol

    @property
    def passed(self) -> bool:
        return not self.failures


def _validate_grid(grid, name):
    grid = tuple(float(x) for x in grid)
    if not grid or any(x <= 0 for x in grid):
        raise ValueError(f"{name} must be non-empty and strictly positive")
    return grid


def yosida_report(
    l: SuperOperator,
    pair: AssociatePair,
    eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    probes: Sequence = (),
    cauchy_tol: float = CAUCHY_GAP_TOL,
    consistency_tol: float = DEFAULT_TOL,
) -> YosidaReport:
    """Check the Yosida family of ``L`` on ``eps_grid`` x ``t_grid``.

    Sub-check failures are collected in ``failures`` rather than raised.
    """
    eps_grid = _validate_grid(eps_grid, "eps_grid")
    if any(a <= b for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be strictly decreasing")
    t_grid = tuple(float(t) for t in t_grid)
    if any(t < 0 for t in t_grid):
        raise ValueError("t_grid must be non-negative")
    d = l.dim
    probes = [as_operator(a, d) for a in probes]
    failures = []
    entries = []
    for eps in eps_grid:
        try:
            l_eps_matrix, gap, floor = _yosida_forms(l, eps)
        except SingularResolventError as exc:
            failures.append(f"eps={eps:g}: {exc}")
            continue
        bound = consistency_tol * max(1.0, fro_norm(l_eps_matrix)) + floor
        if gap > bound:
            failures.append(f"eps={eps:g}: Yosida forms disagree by {gap:.3g}")
        l_eps = SuperOperator(l_eps_matrix, check_dim=False)
        r = resolvent(l, eps)

        probe_res, probe_bnd, res_res, res_bnd = [], [], [], []
        for a in probes:
            la = apply(l, a)
            probe_res.append(op_norm(apply(l_eps, a) - la))
            probe_bnd.append(eps * fro_norm(apply(l, la)) + PROBE_SLACK)
            res_res.append(op_norm(apply(r, a) - a))
            res_bnd.append(eps * op_norm(la) + RESOLVENT_SLACK)

        cps, unitals = [], []
        for t in t_grid:
            u = semigroup_at(l_eps, t)
            cert = is_completely_positive(u, CP_TOL)
            cps.append((cert.min_eigenvalue, cert.passed))
            unitals.append(unitality_residual(u, "semigroup"))

        entry = YosidaEntry(
            eps, gap, probe_res, probe_bnd, res_res, res_bnd, cps, unitals, extract_G(l_eps, pair),
            consistency_bound=bound,
        )
        for label, ok in (
            ("probe bound", entry.probes_ok),
            ("resolvent bound", entry.resolvent_ok),
            ("exp(t L_eps) completely positive", entry.cp_ok),
            ("exp(t L_eps) unital", entry.unital_ok),
        ):
            if not ok:
                failures.append(f"eps={eps:g}: {label} failed")
        entries.append(entry)

    g_limit = extract_G(l, pair)
    if not entries:
        return YosidaReport(
            eps_grid, t_grid, entries, g_limit, g_limit, np.inf, cauchy_tol, False,
            consistency_tol, failures,
        )
    g_min = entries[-1].G
    for entry in entries:
        entry.gap_to_smallest = op_norm(entry.G - g_min)
        entry.gap_to_limit = op_norm(entry.G - g_limit)
    gaps = [e.gap_to_smallest for e in entries]
    limit_gaps = [e.gap_to_limit for e in entries]
    slack = 1e-12 * max(1.0, op_norm(g_limit))
    monotone = all(b <= a + slack for a, b in zip(gaps, gaps[1:])) and all(
        b <= a + slack for a, b in zip(limit_gaps, limit_gaps[1:])
    )
    if not monotone:
        failures.append("G_eps gaps are not monotone in eps")
    if len(entries) >= 2:
        e1, e2 = entries[-2], entries[-1]
        cauchy_gap = op_norm(e1.G - e2.G)
        # first-order Richardson extrapolation to eps = 0 (informational)
        g_extra = (e1.eps * e2.G - e2.eps * e1.G) / (e1.eps - e2.eps)
    else:
        cauchy_gap = entries[-1].gap_to_limit
        g_extra = entries[-1].G
    if cauchy_gap > cauchy_tol:
        failures.append(f"Cauchy gap {cauchy_gap:.3g} exceeds {cauchy_tol:g}")
    return YosidaReport(
        eps_grid, t_grid, entries, g_limit, g_extra, cauchy_gap, cauchy_tol, monotone,
        consistency_tol, failures,
    )
