"""Chern and complexified Levi-Civita Christoffel symbols, torsion and Lee form.

Storage (batch axes omitted)::

    chern[p, i, k]      Chern symbol  cGamma^p_{ik} = h^{p lbar} d_i h_{k lbar}
    lc_holo[k, i, j]    Gamma^k_{ij}
    lc_mixed[k, i, j]   Gamma^k_{ibar j}
    T[k, i, j]          torsion T^k_{ij}
    trace[i]            T_i = sum_k T^k_{ik}

Symbols with two barred lower indices vanish identically and are not stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import MetricJet2
from .tensors import Form01, Form10, hermitian_inverse


@dataclass(frozen=True)
class ChristoffelSet:
    chern: np.ndarray
    lc_holo: np.ndarray
    lc_mixed: np.ndarray


@dataclass(frozen=True)
class TorsionSet:
    T: np.ndarray
    trace: np.ndarray

    @property
    def lee(self) -> tuple[Form10, Form01]:
        """Lee form ``theta = T_i dz^i + conj(T_j) dzbar^j`` as its two type components."""
        return Form10(self.trace), Form01(np.conj(self.trace))


def inverse(jet: MetricJet2) -> np.ndarray:
    return hermitian_inverse(jet.h)


def christoffels(jet: MetricJet2, hinv=None) -> ChristoffelSet:
    M = inverse(jet) if hinv is None else hinv
    dh, dbh = jet.dh, jet.dbar_h
    chern = np.einsum("...lp,...ikl->...pik", M, dh)
    sym = dh + np.swapaxes(dh, -3, -2)  # [i, j, l] = d_i h_{j lbar} + d_j h_{i lbar}
    lc_holo = 0.5 * np.einsum("...lk,...ijl->...kij", M, sym)
    # d_{ibar} h_{j lbar} - d_{lbar} h_{j ibar}
    anti = dbh - np.einsum("...lji->...ijl", dbh)  # [i, j, l]
    lc_mixed = 0.5 * np.einsum("...lk,...ijl->...kij", M, anti)
    return ChristoffelSet(chern, lc_holo, lc_mixed)


def torsion(jet: MetricJet2, hinv=None) -> TorsionSet:
    M = inverse(jet) if hinv is None else hinv
    dh = jet.dh
    diff = dh - np.swapaxes(dh, -3, -2)  # [i, j, l] = d_i h_{j lbar} - d_j h_{i lbar}
    T = np.einsum("...lk,...ijl->...kij", M, diff)
    trace = np.einsum("...kik->...i", T)
    return TorsionSet(T, trace)


def adjoint_torsion_forms(ts: TorsionSet) -> tuple[Form10, Form01]:
    """``dbar^* omega = sqrt(-1) T_i dz^i`` and ``d^* omega = -sqrt(-1) conj(T_j) dzbar^j``."""
    return Form10(1j * ts.trace), Form01(-1j * np.conj(ts.trace))


def gamma_from_torsion(jet: MetricJet2, ts: TorsionSet | None = None, hinv=None) -> np.ndarray:
    """Mixed Levi-Civita symbols rebuilt from torsion alone.

    ``Gamma^k_{ibar j} = 1/2 h^{k lbar} h_{j qbar} conj(T^q_{i l})``.
    """
    M = inverse(jet) if hinv is None else hinv
    ts = torsion(jet, M) if ts is None else ts
    return 0.5 * np.einsum("...lk,...jq,...qil->...kij", M, jet.h, np.conj(ts.T))


def gamma_torsion_relation_residual(jet: MetricJet2, hinv=None) -> np.ndarray:
    """Max-norm over indices of ``Gamma^k_{ibar j}`` minus its torsion expression."""
    M = inverse(jet) if hinv is None else hinv
    diff = christoffels(jet, M).lc_mixed - gamma_from_torsion(jet, hinv=M)
    return np.max(np.abs(diff), axis=(-3, -2, -1))


def lee_trace_residual(jet: MetricJet2, hinv=None) -> np.ndarray:
    """Max-norm of ``2 sum_k Gamma^k_{ibar k} - conj(T_i)``."""
    M = inverse(jet) if hinv is None else hinv
    g = christoffels(jet, M).lc_mixed
    ts = torsion(jet, M)
    lhs = 2 * np.einsum("...kik->...i", g)
    return np.max(np.abs(lhs - np.conj(ts.trace)), axis=-1)


def torsion_derivatives(jet: MetricJet2, hinv=None) -> tuple[np.ndarray, np.ndarray]:
    """First derivatives of the torsion trace.

    Returns ``(dT, dbarT)`` with ``dT[a, i] = d T_i / d z^a`` and
    ``dbarT[a, i] = d T_i / d zbar^a``; they need the mixed and pure second
    derivatives of the metric.
    """
    M = inverse(jet) if hinv is None else hinv
    dh, dbh = jet.dh, jet.dbar_h
    mixed, pure = jet.ddh_mixed, jet.ddh_pure
    # T_i = sum_{k,l} M[l,k] (d_i h_{k lbar} - d_k h_{i lbar})
    diff = dh - np.swapaxes(dh, -3, -2)
    dM_z = -np.einsum("...ab,...kbc,...cd->...kad", M, dh, M)
    dM_zb = -np.einsum("...ab,...kbc,...cd->...kad", M, dbh, M)
    # d/dz^a of (d_i h_{k lbar} - d_k h_{i lbar}) = pure[a,i,k,l] - pure[a,k,i,l]
    d_diff = pure - np.swapaxes(pure, -3, -2)
    dT = np.einsum("...alk,...ikl->...ai", dM_z, diff) + np.einsum("...lk,...aikl->...ai", M, d_diff)
    # d/dzbar^a of d_i h_{k lbar} = mixed[i, a, k, l]
    db_diff = np.einsum("...iakl->...aikl", mixed) - np.einsum("...kail->...aikl", mixed)
    dbarT = np.einsum("...alk,...ikl->...ai", dM_zb, diff) + np.einsum("...lk,...aikl->...ai", M, db_diff)
    return dT, dbarT
