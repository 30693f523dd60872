"""Pointwise identities evaluated as residuals, plus Gauduchon and Einstein checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connections import (adjoint_torsion_forms, christoffels, gamma_torsion_relation_residual,
                          inverse, lee_trace_residual, torsion, torsion_derivatives)
from .curvature import chern_ricci, det_connection, lc_ricci1, ricci1_logdet
from .errors import DimensionError
from .jets import MetricField, MetricJet2, eval_jet
from .tensors import Form11, IdentityReport, form_norm_sq, sym2_norm_sq, trace_lambda

ANALYTIC_TOL = 1e-8
FD_TOL = 1e-5


def _require_surface(jet: MetricJet2, what: str):
    if jet.n != 2:
        raise DimensionError(f"{what} is defined only in complex dimension 2 (got n={jet.n})")


def lambda_ddbar_omega(jet: MetricJet2, hinv=None) -> Form11:
    """Second-derivative combination ``(Lambda d dbar omega)_{i jbar}``.

    ``h^{k mbar} (d_k d_jbar h_{i mbar} + d_i d_mbar h_{k jbar} - d_i d_jbar h_{k mbar}
    - d_k d_mbar h_{i jbar})``.
    """
    M = inverse(jet) if hinv is None else hinv
    D = jet.ddh_mixed  # [a, b, i, j] = d_a d_bbar h_{i jbar}
    terms = (np.einsum("...kjim->...ijkm", D) + np.einsum("...imkj->...ijkm", D)
             - np.einsum("...ijkm->...ijkm", D) - np.einsum("...kmij->...ijkm", D))
    return Form11(np.einsum("...mk,...ijkm->...ij", M, terms))


def ddbar_omega_residual(jet: MetricJet2) -> np.ndarray:
    """Coefficient of ``d dbar omega`` against ``dz1^dzbar1^dz2^dzbar2`` (surfaces only)."""
    _require_surface(jet, "d dbar omega coefficient")
    D = jet.ddh_mixed
    return 1j * (D[..., 0, 0, 1, 1] + D[..., 1, 1, 0, 0] - D[..., 0, 1, 1, 0] - D[..., 1, 0, 0, 1])


def q_tensor(jet: MetricJet2, hinv=None) -> Form11:
    """``Q_{i jbar} = h^{p qbar} h_{k lbar} T^k_{ip} conj(T^l_{jq})``."""
    M = inverse(jet) if hinv is None else hinv
    T = torsion(jet, M).T
    return Form11(np.einsum("...qp,...kl,...kip,...ljq->...ij", M, jet.h, T, np.conj(T)))


def adjoint_torsion_norm_sq(jet: MetricJet2, hinv=None) -> np.ndarray:
    """``|dbar^* omega|^2`` (equal to ``|d^* omega|^2``)."""
    M = inverse(jet) if hinv is None else hinv
    return form_norm_sq(adjoint_torsion_forms(torsion(jet, M))[0], hinv=M)


def dd_star_omega(jet: MetricJet2, hinv=None) -> tuple[Form11, Form11]:
    """``(d d^* omega, dbar dbar^* omega)`` as (1,1)-forms built from derivatives of ``T_i``."""
    M = inverse(jet) if hinv is None else hinv
    _, dbarT = torsion_derivatives(jet, M)
    d_dstar = -np.conj(dbarT)  # -d_i conj(T_j)
    dbar_dbarstar = -np.swapaxes(dbarT, -1, -2)  # -d_jbar T_i
    return Form11(d_dstar), Form11(dbar_dbarstar)


def curvature_relation_residual(jet: MetricJet2, hinv=None) -> Form11:
    """``Theta1 + Theta2 - 2 R1 - Q - Lambda d dbar omega``, zero for every Hermitian metric."""
    M = inverse(jet) if hinv is None else hinv
    r1, r2, _ = chern_ricci(jet, M)
    lc = lc_ricci1(jet, M)
    return r1 + r2 - 2 * lc.coeff - q_tensor(jet, M) - lambda_ddbar_omega(jet, M)


def surface_q_identity_residual(jet: MetricJet2, hinv=None) -> Form11:
    _require_surface(jet, "surface Q identity")
    M = inverse(jet) if hinv is None else hinv
    q = q_tensor(jet, M)
    return q - adjoint_torsion_norm_sq(jet, M)[..., None, None] * jet.h


def nabla_theta_symmetric_part(jet: MetricJet2, hinv=None) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrised Levi-Civita derivative of the Lee form.

    Returns ``(mixed, pure)`` with ``mixed[i, j]`` the ``(d_i, d_jbar)`` component
    and ``pure[i, j]`` the ``(d_i, d_j)`` component; the remaining components
    are their conjugates.
    """
    M = inverse(jet) if hinv is None else hinv
    cs = christoffels(jet, M)
    T = torsion(jet, M).trace
    dT, dbarT = torsion_derivatives(jet, M)
    Gm = cs.lc_mixed
    mixed = (np.conj(dbarT) + np.swapaxes(dbarT, -1, -2)
             - 2 * np.einsum("...sji,...s->...ij", Gm, T)
             - 2 * np.einsum("...sij,...s->...ij", np.conj(Gm), np.conj(T)))
    pure = dT + np.swapaxes(dT, -1, -2) - 2 * np.einsum("...sij,...s->...ij", cs.lc_holo, T)
    return mixed, pure


def nabla_theta_symmetric_norm(jet: MetricJet2, hinv=None) -> np.ndarray:
    M = inverse(jet) if hinv is None else hinv
    mixed, pure = nabla_theta_symmetric_part(jet, M)
    return np.sqrt(form_norm_sq(Form11(mixed), hinv=M) + sym2_norm_sq(pure, M))


def surface_gamma_torsion_residual(jet: MetricJet2, hinv=None) -> Form11:
    """``2 Gamma^s_{i jbar} T_s - (T_i conj(T_j) - |d^* omega|^2 h_{i jbar})``."""
    _require_surface(jet, "surface Gamma-torsion identity")
    M = inverse(jet) if hinv is None else hinv
    Gm = christoffels(jet, M).lc_mixed
    T = torsion(jet, M).trace
    lhs = 2 * np.einsum("...sji,...s->...ij", Gm, T)
    rhs = T[..., :, None] * np.conj(T)[..., None, :] - adjoint_torsion_norm_sq(jet, M)[..., None, None] * jet.h
    return Form11(lhs - rhs)


def equation_S_residual(jet: MetricJet2, hinv=None) -> Form11:
    """``d d^* omega + dbar dbar^* omega + 2 sqrt(-1) dbar^* omega ^ d^* omega - 2 |d^* omega|^2 omega``."""
    _require_surface(jet, "equation (S)")
    M = inverse(jet) if hinv is None else hinv
    a, b = dd_star_omega(jet, M)
    T = torsion(jet, M).trace
    wedge = -2 * T[..., :, None] * np.conj(T)[..., None, :]
    rhs = wedge + 2 * adjoint_torsion_norm_sq(jet, M)[..., None, None] * jet.h
    return a + b - rhs


def norm11(form: Form11, jet: MetricJet2, hinv=None) -> np.ndarray:
    M = inverse(jet) if hinv is None else hinv
    return np.sqrt(np.maximum(form_norm_sq(form, hinv=M), 0.0))


# --------------------------------------------------------------------------
# weakly Hermitian-Einstein check

@dataclass
class WHEReport:
    u: np.ndarray
    proportionality_residual: float
    constancy: np.ndarray
    lambda_estimate: float
    constancy_spread: float
    residuals: np.ndarray = field(repr=False, default=None)


def whe_check(field_or_jet, points=None) -> WHEReport:
    """Einstein function ``u = s / n``, ``|Theta2 - u omega|`` and the spread of ``u - |dbar^* omega|^2``."""
    jet = field_or_jet if isinstance(field_or_jet, MetricJet2) else eval_jet(field_or_jet, points)
    M = inverse(jet)
    _, r2, s = chern_ricci(jet, M)
    u = s / jet.n
    res = norm11(r2 - u[..., None, None] * jet.h, jet, M)
    c = u - adjoint_torsion_norm_sq(jet, M)
    lam = float(np.sum(c) / c.size)
    return WHEReport(u=u, proportionality_residual=float(np.max(res)), constancy=c,
                     lambda_estimate=lam, constancy_spread=float(np.max(c) - np.min(c)),
                     residuals=res)


# --------------------------------------------------------------------------
# identity suite

def identity_residuals(jet: MetricJet2) -> dict:
    """Every pointwise residual applicable to the jet's dimension, as per-point arrays."""
    M = inverse(jet)
    out = {}
    out["gamma_torsion_relation"] = gamma_torsion_relation_residual(jet, M)
    out["lee_trace_relation"] = lee_trace_residual(jet, M)
    r1, r2, s = chern_ricci(jet, M)
    out["ricci1_two_routes"] = norm11(r1 - ricci1_logdet(jet, M), jet, M)
    lc = lc_ricci1(jet, M)
    det = det_connection(jet, M)
    out["lc_ricci1_two_routes"] = norm11(lc - det.eta11.coeff, jet, M)
    out["double_trace"] = np.abs(trace_lambda(r1, hinv=M) - trace_lambda(r2, hinv=M))
    out["ricci_reality"] = np.maximum(
        np.max(np.abs(r1.coeff - np.conj(np.swapaxes(r1.coeff, -1, -2))), axis=(-2, -1)),
        np.max(np.abs(r2.coeff - np.conj(np.swapaxes(r2.coeff, -1, -2))), axis=(-2, -1)))
    out["curvature_relation"] = norm11(curvature_relation_residual(jet, M), jet, M)
    q = q_tensor(jet, M).coeff
    qh = 0.5 * (q + np.conj(np.swapaxes(q, -1, -2)))
    out["q_positive_semidefinite"] = np.maximum(0.0, -np.linalg.eigvalsh(qh)[..., 0])
    out["det_metric_compatibility"] = np.max(
        np.abs(det.a01.components + np.conj(det.a10.components)
               - np.einsum("...mk,...ikm->...i", M, jet.dbar_h)), axis=-1)
    if jet.n == 2:
        out["surface_q_identity"] = norm11(surface_q_identity_residual(jet, M), jet, M)
        out["surface_gamma_torsion"] = norm11(surface_gamma_torsion_residual(jet, M), jet, M)
        out["gauduchon"] = np.abs(ddbar_omega_residual(jet))
        out["equation_S"] = norm11(equation_S_residual(jet, M), jet, M)
        a, b = dd_star_omega(jet, M)
        t = adjoint_torsion_norm_sq(jet, M)
        out["gauduchon_trace"] = np.maximum(np.abs(trace_lambda(a, hinv=M) - t),
                                            np.abs(trace_lambda(b, hinv=M) - t))
    out["nabla_theta_symmetric"] = nabla_theta_symmetric_norm(jet, M)
    w = whe_check(jet)
    out["whe_proportionality"] = w.residuals
    if jet.n == 2:
        out["whe_constancy"] = np.abs(w.constancy - w.lambda_estimate)
    return out


# identities that hold for every Hermitian metric of the stated dimension
UNCONDITIONAL = ("gamma_torsion_relation", "lee_trace_relation", "ricci1_two_routes",
                 "lc_ricci1_two_routes", "double_trace", "ricci_reality", "curvature_relation",
                 "q_positive_semidefinite", "det_metric_compatibility", "surface_q_identity",
                 "surface_gamma_torsion")
# identities asserted only when the manifold carries all the listed properties
CONDITIONAL = {
    "gauduchon": ("gauduchon",),
    "gauduchon_trace": ("gauduchon",),
    "equation_S": ("skew_lee",),
    "nabla_theta_symmetric": ("skew_lee",),
    "whe_proportionality": ("whe",),
    "whe_constancy": ("gauduchon", "whe"),
}


def identity_suite(jet: MetricJet2, properties=(), tolerance: float = ANALYTIC_TOL,
                   tolerances: dict | None = None) -> list[IdentityReport]:
    """Run every identity on a batch jet.

    Conditional identities are asserted only if ``properties`` contains every
    property they depend on; otherwise their verdict is ``"not-applicable"``.
    ``"kahler"`` implies ``"gauduchon"`` and ``"skew_lee"``.
    """
    props = set(properties)
    if "kahler" in props:
        props |= {"gauduchon", "skew_lee"}
    tolerances = dict(tolerances or {})
    reports = []
    for name, res in identity_residuals(jet).items():
        asserted = all(p in props for p in CONDITIONAL.get(name, ()))
        tol = tolerances.get(name, tolerance) if asserted else None
        reports.append(IdentityReport.from_residuals(name, jet.n, res, tol))
    return reports
