"""The checks behind each CLI command, assembled into a ``Report``.

Mathematical failures are recorded as failed checks and never abort a run.
Input problems (bad files, dimension violations) propagate as exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import examples as ex
from .cp import DEFAULT_RANK_TOL, is_completely_positive, is_conditionally_completely_positive
from .errors import GramNotPSDError, NotHermiticityPreservingError, PhiNotCPError
from .forge import (
    DEFAULT_DECOMPOSE_TOL,
    DEFAULT_GRAM_TOL,
    associate_vector,
    lindblad_decompose,
    stinespring_dilate,
)
from .linalg import DEFAULT_TOL, dagger, fro_norm, matrix_unit, op_norm
from .report import Report
from .specio import GeneratorSpec
from .superop import SuperOperator, apply, choi_of, hermiticity_residual, unitality_residual
from .yosida import (
    CAUCHY_GAP_TOL,
    CP_TOL,
    DEFAULT_EPS_GRID,
    DEFAULT_T_GRID,
    map_norm_estimate,
    semigroup_at,
    yosida_report,
)

RECONSTRUCTION_TOL = 1e-9
DILATION_TOL = 1e-9
EVOLVE_UNITAL_TOL = 1e-9
SEMIGROUP_LAW_TOL = 1e-9
NORM_ONE_SLACK = 1e-7
DEFAULT_EVOLVE_TIMES = (0.1, 0.5, 1.0)


@dataclass
class Options:
    samples: int = 200
    seed: int = 0
    tol: float | None = None
    rank_tol: float = DEFAULT_RANK_TOL
    gram_tol: float = DEFAULT_GRAM_TOL
    gap_tol: float = CAUCHY_GAP_TOL
    times: tuple = DEFAULT_EVOLVE_TIMES
    eps: tuple = DEFAULT_EPS_GRID
    T: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def tol_or(self, default: float) -> float:
        return default if self.tol is None else self.tol


def _witness_json(w) -> dict:
    return {
        "operators": list(w.operators),
        "vectors": [np.asarray(u) for u in w.vectors],
        "value": w.value,
        "constraint_residual": w.constraint_residual,
    }


def _hermiticity(report: Report, l: SuperOperator, tol: float) -> bool:
    res = hermiticity_residual(l)
    return report.add(
        "hermiticity_preserving", res, tol * max(1.0, l.norm()),
        "max over matrix units of ||L(E^*) - L(E)^*||_F",
    ).passed


def _unitality(report: Report, l: SuperOperator, tol: float):
    report.add("unitality", unitality_residual(l, "generator"), tol * l.dim, "||L(1)|| in operator norm")


def run_validate(spec: GeneratorSpec, opts: Options) -> Report:
    report = Report("validate")
    if not spec.is_generator:
        return run_shift_reset(spec, report)
    l = spec.generator()
    tol = opts.tol_or(DEFAULT_TOL)
    herm_ok = _hermiticity(report, l, tol)
    _unitality(report, l, tol)
    if not herm_ok:
        report.add("ccp", np.inf, tol, "requires hermiticity preservation", passed=False)
        return report
    verdict = is_conditionally_completely_positive(l, opts.samples, opts.seed, tol)
    report.add(
        "ccp_spectral", max(0.0, -verdict.spectral_min), verdict.tolerance,
        "Choi matrix compressed to the complement of the maximally entangled vector is PSD",
        passed=verdict.spectral_passed,
    )
    if verdict.sampled_passed is not None:
        w = verdict.worst_witness
        report.add(
            "ccp_sampled", max(0.0, -w.value / w.scale), tol,
            "min over constrained tuples of sum <u_i, L(A_i^* A_j) u_j>, relative to its scale",
            passed=verdict.sampled_passed,
        )
    details = {
        "samples": verdict.samples_evaluated,
        "seed": opts.seed,
        "spectral_min": verdict.spectral_min,
        "sampled_min": verdict.sampled_min,
        "notes": list(verdict.notes),
    }
    if verdict.arbitration is not None:
        details["semigroup_cp"] = verdict.arbitration
    if not verdict.passed and verdict.worst_witness is not None:
        details["witness"] = _witness_json(verdict.worst_witness)
    report.details["ccp"] = details
    return report


def _decompose(spec: GeneratorSpec, opts: Options, report: Report):
    l = spec.generator()
    tol = opts.tol_or(DEFAULT_DECOMPOSE_TOL)
    if not _hermiticity(report, l, tol):
        return l, None
    try:
        dec = lindblad_decompose(l, opts.T, tol, opts.rank_tol)
    except PhiNotCPError as exc:
        report.add("phi_completely_positive", max(0.0, -exc.min_eigenvalue), tol, "Choi matrix of phi is PSD", passed=False)
        return l, None
    choi_scale = max(1.0, op_norm(choi_of(dec.phi).matrix))
    report.add(
        "phi_completely_positive", max(0.0, -dec.phi_min_eigenvalue), tol * choi_scale,
        "min Choi eigenvalue of phi",
    )
    report.add(
        "reconstruction", dec.residual, RECONSTRUCTION_TOL * max(1.0, l.norm()),
        "||L - (sum V_j^* . V_j + G . + . G^*)||_F",
    )
    report.add("kraus_count", len(dec.kraus), l.dim ** 2, "number of Kraus operators <= d^2")
    unital = unitality_residual(l, "generator") <= tol * l.dim
    if unital:
        report.add("unitality_identity", dec.unitality_residual, tol, "||sum V_j^* V_j + G + G^*||")
    else:
        report.add(
            "unitality_identity", dec.unitality_residual, tol,
            "requires L(1) = 0", passed=False,
        )
    report.details["decomposition"] = {
        "T": dec.pair.T,
        "h": dec.pair.h,
        "G": dec.G,
        "kraus": list(dec.kraus),
        "residual": dec.residual,
        "relative_residual": dec.relative_residual,
        "phi_min_eigenvalue": dec.phi_min_eigenvalue,
    }
    return l, dec


def run_decompose(spec: GeneratorSpec, opts: Options) -> Report:
    report = Report("decompose")
    _decompose(spec, opts, report)
    return report


def run_dilate(spec: GeneratorSpec, opts: Options) -> Report:
    report = Report("dilate")
    l, dec = _decompose(spec, opts, report)
    if dec is None:
        return report
    phi = dec.phi
    d = l.dim
    try:
        dil = stinespring_dilate(phi, opts.gram_tol, scale=max(1.0, l.norm()))
    except GramNotPSDError as exc:
        report.add("gram_positive", max(0.0, -exc.min_eigenvalue), opts.gram_tol, "Gram form is PSD", passed=False)
        return report
    scale = max(1.0, phi.norm())
    basis = [matrix_unit(d, i, j) for j in range(d) for i in range(d)]
    repro = max(op_norm(dil.compress(a) - apply(phi, a)) for a in basis) if dil.dilation_dim else max(
        op_norm(apply(phi, a)) for a in basis
    )
    report.add("reproduction", repro, DILATION_TOL * scale, "max over matrix units of ||V^* pi(A) V - phi(A)||")
    k = dil.dilation_dim
    if k:
        unit = op_norm(dil.pi(np.eye(d)) - np.eye(k))
        mult = max(op_norm(dil.pi(a @ b) - dil.pi(a) @ dil.pi(b)) for a in basis for b in basis)
        adj = max(op_norm(dil.pi(dagger(a)) - dagger(dil.pi(a))) for a in basis)
        contr = max(op_norm(dil.pi(a)) - op_norm(a) for a in basis)
    else:
        unit = mult = adj = contr = 0.0
    report.add("pi_unital", unit, DILATION_TOL, "||pi(1) - 1||")
    report.add("pi_multiplicative", mult, DILATION_TOL, "max ||pi(AB) - pi(A) pi(B)|| over matrix units")
    report.add("pi_adjoint", adj, DILATION_TOL, "max ||pi(A^*) - pi(A)^*|| over matrix units")
    report.add("pi_contractive", max(0.0, contr), DILATION_TOL, "max ||pi(A)|| - ||A|| over matrix units")
    rank = dil.minimality_rank()
    report.add("minimality", abs(rank - k), 0.0, "rank of {pi(E_pq) V e_r} equals k")
    if unitality_residual(l, "generator") <= opts.tol_or(DEFAULT_DECOMPOSE_TOL) * d:
        vv = dagger(dil.V) @ dil.V if k else np.zeros((d, d))
        report.add(
            "unitality_identity_dilation", op_norm(vv + dec.G + dagger(dec.G)),
            opts.tol_or(DEFAULT_DECOMPOSE_TOL), "||V^* V + G + G^*||",
        )
    report.details["dilation"] = {
        "dilation_dim": k,
        "multiplicity": dil.multiplicity,
        "gram_eigenvalues": dil.gram_eigenvalues,
        "V": dil.V if k else [],
    }
    return report


def run_evolve(spec: GeneratorSpec, opts: Options) -> Report:
    report = Report("evolve")
    l = spec.generator()
    d = l.dim
    times = tuple(float(t) for t in opts.times)
    maps = {t: semigroup_at(l, t) for t in times}
    for t in times:
        u = maps[t]
        try:
            cert = is_completely_positive(u, CP_TOL)
            report.add(f"cp[t={t:g}]", max(0.0, -cert.min_eigenvalue), cert.tolerance, "min Choi eigenvalue of exp(tL)")
        except NotHermiticityPreservingError:
            report.add(f"cp[t={t:g}]", np.inf, CP_TOL, "exp(tL) is not hermiticity preserving", passed=False)
        report.add(f"unital[t={t:g}]", unitality_residual(u, "semigroup"), EVOLVE_UNITAL_TOL, "||exp(tL)(1) - 1||")
        norm = map_norm_estimate(u, amplification=2, seed=opts.seed)
        report.add(
            f"norm_one[t={t:g}]", max(0.0, norm - 1.0), NORM_ONE_SLACK,
            "ascent estimate of the norm of exp(tL) amplified to M_2(M_d), minus 1",
        )
    for s, t in zip(times, times[1:]):
        composed = maps[s].matrix @ maps[t].matrix
        direct = semigroup_at(l, s + t).matrix
        report.add(
            f"semigroup_law[s={s:g},t={t:g}]", fro_norm(composed - direct) / max(1.0, fro_norm(direct)),
            SEMIGROUP_LAW_TOL, "||T_s T_t - T_(s+t)||_F relative",
        )
    report.details["times"] = list(times)
    report.details["dim"] = d
    return report


def run_yosida(spec: GeneratorSpec, opts: Options) -> Report:
    report = Report("yosida")
    l = spec.generator()
    d = l.dim
    t = np.eye(d, dtype=complex) / d if opts.T is None else opts.T
    pair = associate_vector(t, opts.rank_tol)
    probes = [np.eye(d, dtype=complex)] + [matrix_unit(d, i, j) for j in range(d) for i in range(d)]
    yr = yosida_report(l, pair, opts.eps, DEFAULT_T_GRID, probes, cauchy_tol=opts.gap_tol)
    for e in yr.entries:
        tag = f"eps={e.eps:g}"
        report.add(f"consistency[{tag}]", e.consistency_gap, e.consistency_bound,
                   "||L R - (R - 1)/eps||_F")
        worst = max((r - b for r, b in zip(e.probe_residuals, e.probe_bounds)), default=-np.inf)
        report.add(f"probe_bound[{tag}]", max(0.0, worst), 0.0,
                   "max over probes of ||L_eps A - L A|| - (eps ||L^2 A||_F + 1e-9)")
        worst = max((r - b for r, b in zip(e.resolvent_residuals, e.resolvent_bounds)), default=-np.inf)
        report.add(f"resolvent_bound[{tag}]", max(0.0, worst), 0.0,
                   "max over probes of ||R A - A|| - (eps ||L A|| + 1e-10)")
        lam = min(m for m, _ in e.cp_min_eigenvalues)
        report.add(f"cp[{tag}]", max(0.0, -lam), CP_TOL, "min Choi eigenvalue of exp(t L_eps) over the t grid",
                   passed=e.cp_ok)
        report.add(f"unital[{tag}]", max(e.unital_residuals), CP_TOL, "max ||exp(t L_eps)(1) - 1|| over the t grid")
    report.add("monotone_gaps", 0.0 if yr.monotone else 1.0, 0.0,
               "||G_eps - G_eps_min|| and ||G_eps - G|| non-increasing as eps decreases")
    report.add("cauchy_gap", yr.cauchy_gap, yr.cauchy_tol, "||G_eps - G_eps'|| for the two smallest eps")
    report.details["yosida"] = {
        "eps": list(yr.eps_grid),
        "t": list(yr.t_grid),
        "gap_to_smallest": [e.gap_to_smallest for e in yr.entries],
        "gap_to_limit": [e.gap_to_limit for e in yr.entries],
        "G_limit": yr.G_limit,
        "G_extrapolated": yr.G_extrapolated,
        "failures": list(yr.failures),
    }
    return report


def run_shift_reset(spec: GeneratorSpec, report: Report, max_steps: int = 8) -> Report:
    m = spec.shift_reset_model()
    d = m.dim
    bad = sum(
        not ex.projector_identity_holds(m, j, n) for j in range(d + 1) for n in range(d + 1 - j)
    )
    report.add("projector_identity", float(bad), 0.0, "E_(m+n) == E_m + S^m E_n S^*m bitwise, all m + n <= d")
    unital = max(float(np.max(np.abs(m.apply(n, np.eye(d)) - np.eye(d)))) for n in range(d + 1))
    report.add("unital", unital, 0.0, "max over n of |phi_n(1) - 1| entrywise")
    probes = ex.default_probes(m, d - 16)
    kraus_gap = 0.0
    for n in range(max_steps + 1):
        ops = m.kraus(n)
        for a in probes:
            via_kraus = sum(dagger(v) @ a @ v for v in ops)
            kraus_gap = max(kraus_gap, op_norm(via_kraus - m.apply(n, a)))
    report.add("kraus_certificate", kraus_gap, 1e-12,
               "phi_n agrees with its Kraus form on probes, n <= 8")
    pairs = [(j, n) for j in range(max_steps + 1) for n in range(max_steps + 1 - j)]
    worst = max(r.residual for r in ex.shift_reset_semigroup_check(m, pairs))
    report.add("semigroup", worst, 1e-9, "max ||phi_m phi_n A - phi_(m+n) A|| over probes, m + n <= 8")
    omega = max(ex.omega_invariance_residual(m, n, probes) for n in range(max_steps + 1))
    report.add("omega_invariance", omega, 1e-9, "max |omega(phi_n A) - omega(A)| on probes below d - 16")
    report.details["shift_reset"] = {"dim": d, "delta": m.delta, "max_steps": max_steps}
    return report


COMMANDS = {
    "validate": run_validate,
    "decompose": run_decompose,
    "dilate": run_dilate,
    "evolve": run_evolve,
    "yosida": run_yosida,
}


def run(command: str, spec: GeneratorSpec, opts: Options) -> Report:
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    if command != "validate" and not spec.is_generator:
        raise ValueError(f"{command} needs a generator; shift_reset is a discrete-time map family")
    return COMMANDS[command](spec, opts)
