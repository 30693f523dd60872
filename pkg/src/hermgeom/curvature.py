"""Curvature of the Chern and induced Levi-Civita connections from a metric jet.

Derivatives of the inverse metric are always expanded as
``d(h^{-1}) = -h^{-1} (dh) h^{-1}`` so every quantity is a closed-form
function of the jet.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import christoffels, inverse, torsion_derivatives
from .dsl import Expr, eval_scalar_jet, parse_expr
from .jets import Jet, MetricField, MetricJet2
from .tensors import (ROLES_CHERN, ROLES_LC, Form01, Form10, Form11, Tensor4, form_norm_sq,
                      tensor4_norm_sq, trace_lambda)


@dataclass(frozen=True)
class CurvatureBundle:
    chern_full: Tensor4
    ricci1: Form11
    ricci2: Form11
    scalar: np.ndarray
    lc11: Tensor4
    lc_ricci1: Form11


@dataclass(frozen=True)
class DetConnectionForms:
    """Connection and curvature forms of the Levi-Civita connection on the determinant line.

    ``a10`` and ``a01`` are the two type components of the connection form.
    Curvature forms use the real convention (``sqrt(-1)`` times the curvature
    2-form): ``eta11`` is a :class:`Form11` and ``eta20[j, i]`` is the
    antisymmetric coefficient array with ``eta^{2,0} = sum_{j<i} eta20[j, i]
    dz^j ^ dz^i``; ``eta^{0,2}`` is its conjugate.
    """

    a10: Form10
    a01: Form01
    eta20: np.ndarray
    eta11: Form11


def _dinv(M, dh, dbh):
    dM_z = -np.einsum("...ab,...kbc,...cd->...kad", M, dh, M)
    dM_zb = -np.einsum("...ab,...kbc,...cd->...kad", M, dbh, M)
    return dM_z, dM_zb


def chern_curvature(jet: MetricJet2, hinv=None) -> Tensor4:
    """``Theta_{i jbar k lbar} = -d_i d_jbar h_{k lbar} + h^{p qbar} d_jbar h_{p lbar} d_i h_{k qbar}``."""
    M = inverse(jet) if hinv is None else hinv
    quad = np.einsum("...qp,...jpl,...ikq->...ijkl", M, jet.dbar_h, jet.dh)
    return Tensor4(-jet.ddh_mixed + quad, ROLES_CHERN)


def ricci1_logdet(jet: MetricJet2, hinv=None) -> Form11:
    """First Chern-Ricci form from ``-d dbar log det h`` with ``d log det h = tr(h^{-1} dh)``."""
    M = inverse(jet) if hinv is None else hinv
    _, dM_zb = _dinv(M, jet.dh, jet.dbar_h)
    val = np.einsum("...jmk,...ikm->...ij", dM_zb, jet.dh) + np.einsum("...mk,...ijkm->...ij", M, jet.ddh_mixed)
    return Form11(-val)


def chern_ricci(jet: MetricJet2, hinv=None):
    """Return ``(Theta1, Theta2, s)``: both Chern-Ricci forms and the Chern scalar curvature."""
    M = inverse(jet) if hinv is None else hinv
    theta = chern_curvature(jet, M)
    r1 = Form11(theta.trace_pair(2, 3, M))
    r2 = Form11(theta.trace_pair(0, 1, M))
    s = np.real(trace_lambda(r1, hinv=M))
    return r1, r2, s


def _lc_gamma_derivatives(jet: MetricJet2, M):
    dh, dbh = jet.dh, jet.dbar_h
    mixed = jet.ddh_mixed
    dM_z, dM_zb = _dinv(M, dh, dbh)
    sym = dh + np.swapaxes(dh, -3, -2)  # [i, k, m]
    anti = dbh - np.einsum("...mkj->...jkm", dbh)  # [j, k, m] = d_jbar h_{k mbar} - d_mbar h_{k jbar}
    # d/dzbar^j of Gamma^l_{ik} -> [j, l, i, k]
    d_sym = mixed + np.einsum("...kjim->...ijkm", mixed)  # [i, j, k, m] = dbar_j(d_i h_km + d_k h_im)
    db_holo = 0.5 * (np.einsum("...jml,...ikm->...jlik", dM_zb, sym)
                     + np.einsum("...ml,...ijkm->...jlik", M, d_sym))
    # d/dz^i of Gamma^l_{jbar k} -> [i, l, j, k]
    d_anti = mixed - np.einsum("...imkj->...ijkm", mixed)  # [i, j, k, m]
    d_mixed = 0.5 * (np.einsum("...iml,...jkm->...iljk", dM_z, anti)
                     + np.einsum("...ml,...ijkm->...iljk", M, d_anti))
    return db_holo, d_mixed


def lc_curvature_11(jet: MetricJet2, hinv=None) -> Tensor4:
    """(1,1) curvature ``R_{i jbar k}^l`` of the induced Levi-Civita connection."""
    M = inverse(jet) if hinv is None else hinv
    cs = christoffels(jet, M)
    G, Gm = cs.lc_holo, cs.lc_mixed
    db_holo, d_mixed = _lc_gamma_derivatives(jet, M)
    t1 = np.einsum("...jlik->...ijkl", db_holo)
    t2 = np.einsum("...iljk->...ijkl", d_mixed)
    t3 = np.einsum("...sik,...ljs->...ijkl", G, Gm)
    t4 = np.einsum("...sjk,...lis->...ijkl", Gm, G)
    return Tensor4(-(t1 - t2 + t3 - t4), ROLES_LC)


def lc_ricci1(jet: MetricJet2, hinv=None) -> Form11:
    M = inverse(jet) if hinv is None else hinv
    return Form11(lc_curvature_11(jet, M).trace_pair(2, 3))


def curvature_bundle(jet: MetricJet2, hinv=None) -> CurvatureBundle:
    M = inverse(jet) if hinv is None else hinv
    theta = chern_curvature(jet, M)
    r1 = Form11(theta.trace_pair(2, 3, M))
    r2 = Form11(theta.trace_pair(0, 1, M))
    lc = lc_curvature_11(jet, M)
    return CurvatureBundle(theta, r1, r2, np.real(trace_lambda(r1, hinv=M)), lc,
                           Form11(lc.trace_pair(2, 3)))


def det_connection(jet: MetricJet2, hinv=None) -> DetConnectionForms:
    """Levi-Civita connection on ``det T^{1,0}`` and the type decomposition of its curvature.

    The holomorphic part of the connection form is split as
    ``a_i = (d_i log det h + c_i) / 2`` with ``c_i = h^{k mbar} d_k h_{i mbar}``
    and the antiholomorphic part is ``conj(T_i) / 2``; the curvature is
    assembled from derivatives of those pieces, independently of
    :func:`lc_curvature_11`.
    """
    M = inverse(jet) if hinv is None else hinv
    dh = jet.dh
    dM_z, dM_zb = _dinv(M, dh, jet.dbar_h)
    cs = christoffels(jet, M)
    a10 = np.einsum("...kik->...i", cs.lc_holo)
    a01 = np.einsum("...kik->...i", cs.lc_mixed)
    # derivatives of c_i = sum M[m,k] dh[k,i,m]
    dc = (np.einsum("...jmk,...kim->...ji", dM_z, dh)
          + np.einsum("...mk,...jkim->...ji", M, jet.ddh_pure))
    dbc = (np.einsum("...jmk,...kim->...ji", dM_zb, dh)
           + np.einsum("...mk,...kjim->...ji", M, jet.ddh_mixed))
    _, dbarT = torsion_derivatives(jet, M)
    theta1 = ricci1_logdet(jet, M).coeff
    eta11 = 0.5 * np.conj(dbarT) + 0.5 * theta1 - 0.5 * np.swapaxes(dbc, -1, -2)
    eta20 = 0.5j * (dc - np.swapaxes(dc, -1, -2))
    return DetConnectionForms(Form10(a10), Form01(a01), eta20, Form11(eta11))


# --------------------------------------------------------------------------
# conformal change

def _as_expr(f, n: int) -> Expr:
    return parse_expr(f, n) if isinstance(f, str) else f


def scalar_jet(f, points) -> Jet:
    points = np.asarray(points, dtype=complex)
    return eval_scalar_jet(_as_expr(f, points.shape[-1]), points)


def _check_real(fj: Jet, atol: float = 1e-10):
    n = fj.nvars // 2
    scale = np.maximum(1.0, np.abs(fj.val))
    bad = (np.abs(fj.val.imag) > atol * scale) | np.any(
        np.abs(fj.grad[..., n:] - np.conj(fj.grad[..., :n])) > atol * scale[..., None], axis=-1)
    if np.any(bad):
        raise ValueError("conformal factor exponent f must be real-valued")


def conformal_jet(jet: MetricJet2, fj: Jet) -> MetricJet2:
    """Jet of ``exp(f) h`` from the jets of ``h`` and ``f``."""
    _check_real(fj)
    g = Jet(fj.val[..., None, None], fj.grad[..., None, None, :], fj.hess[..., None, None, :, :]).exp()
    return MetricJet2.from_jet(g * jet.to_jet())


def conformal_transform(field: MetricField, f) -> MetricField:
    """The field ``exp(f) h`` for a real expression ``f`` in ``z, conj(z)``."""
    expr = _as_expr(f, field.n)

    def jet_fn(points):
        return conformal_jet(field.jet_fn(points), eval_scalar_jet(expr, points))

    def matrix_fn(points):
        from .dsl import evaluate
        return np.exp(np.real(evaluate(expr, points)))[..., None, None] * field.matrix(points)

    return MetricField(field.n, f"exp(f)*{field.name}", jet_fn, matrix_fn, field.valid,
                       dict(field.params, conformal_exponent=str(f)))


def conformal_residual(jet: MetricJet2, fj: Jet):
    """Residuals of the conformal transformation law at each point.

    Returns ``(chern_residual, ricci2_residual)``: metric norms (in the
    rescaled metric) of
    ``Theta(e^f h) - (e^f Theta - e^f h_{k lbar} f_{i jbar})`` and of
    ``Theta2(e^f h) - (Theta2 - (Lambda ddbar f) h)``.
    """
    n = jet.n
    M = inverse(jet)
    jf = conformal_jet(jet, fj)
    Mf = inverse(jf)
    theta_f = chern_curvature(jf, Mf).entries
    theta = chern_curvature(jet, M).entries
    ef = np.exp(np.real(fj.val))[..., None, None, None, None]
    fmix = fj.hess[..., :n, n:]
    law = ef * theta - ef * np.einsum("...kl,...ij->...ijkl", jet.h, fmix)
    r_chern = np.sqrt(tensor4_norm_sq(Tensor4(theta_f - law, ROLES_CHERN), Mf))
    _, r2, _ = chern_ricci(jet, M)
    _, r2f, _ = chern_ricci(jf, Mf)
    lam = trace_lambda(fmix, hinv=M)
    law2 = r2.coeff - lam[..., None, None] * jet.h
    r_ricci2 = np.sqrt(form_norm_sq(Form11(r2f.coeff - law2), hinv=Mf))
    return r_chern, r_ricci2
