import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermgeom import dsl, zoo
from hermgeom.connections import (adjoint_torsion_forms, christoffels, gamma_from_torsion,
                                  gamma_torsion_relation_residual, lee_trace_residual, torsion,
                                  torsion_derivatives)
from hermgeom.jets import eval_jet
from hermgeom.tensors import form_norm_sq

from conftest import random_points, wirtinger_fd

P0 = np.array([1.0, 0.0], complex)


def test_flat_symbols_vanish(flat2):
    jet = eval_jet(flat2.field, random_points(3, 2))
    cs = christoffels(jet)
    assert not np.any(cs.chern) and not np.any(cs.lc_holo) and not np.any(cs.lc_mixed)
    assert not np.any(torsion(jet).T)


def test_kahler_exp_metric_n1():
    field = dsl.load_metric("h11 = exp(z1*conj(z1))", 1)
    jet = eval_jet(field, np.array([0.5 + 0j]))
    cs = christoffels(jet)
    assert np.allclose(cs.chern, cs.lc_holo, atol=1e-15)
    assert np.allclose(cs.lc_mixed, 0, atol=1e-15)
    # d log h / dz = conj(z)
    assert np.isclose(cs.chern[0, 0, 0], 0.5)
    assert not np.any(torsion(jet).T)


def test_hopf_anchors(hopf4):
    jet = eval_jet(hopf4.field, P0)
    assert np.isclose(christoffels(jet).chern[0, 0, 0], -1)
    ts = torsion(jet)
    assert np.isclose(ts.T[1, 0, 1], -1)
    assert np.allclose(ts.trace, [-1, 0])
    a10, a01 = adjoint_torsion_forms(ts)
    assert np.allclose(a10.components, [-1j, 0])
    assert np.isclose(form_norm_sq(a10, hinv=np.eye(2) / 4), 0.25)
    assert np.max(gamma_torsion_relation_residual(jet)) < 1e-12


def test_hopf_torsion_closed_form(hopf4):
    pts = hopf4.sample(50, seed=4)
    ts = torsion(eval_jet(hopf4.field, pts))
    zb = np.conj(pts)
    r2 = np.sum(np.abs(pts) ** 2, axis=-1)
    assert np.allclose(ts.trace, -zb / r2[:, None], rtol=1e-13, atol=1e-15)
    d = np.eye(2)
    expect = (np.einsum("ik,Nj->Nkij", d, zb) - np.einsum("jk,Ni->Nkij", d, zb)) / r2[:, None, None, None]
    assert np.allclose(ts.T, expect, atol=1e-14)


@pytest.mark.parametrize("c", [0.5, 1.0, 4.0, 10.0])
def test_hopf_torsion_independent_of_c(c):
    entry = zoo.hopf(c)
    pts = entry.sample(10, seed=1)
    r2 = np.sum(np.abs(pts) ** 2, axis=-1)
    assert np.allclose(torsion(entry.jet(pts)).trace, -np.conj(pts) / r2[:, None], atol=1e-14)


def _brute_symbols(field, p):
    """Christoffel symbols and torsion from finite-difference metric derivatives and explicit loops."""
    n = field.n
    h = field.matrix(p[None])[0]
    d, db = wirtinger_fd(lambda q: field.matrix(q[None])[0], p)  # d[k, i, j] = d_k h_{i jbar}
    Hinv = np.linalg.inv(h)  # Hinv[l, k] = h^{k lbar}
    up = lambda k, l: Hinv[l, k]
    chern = np.zeros((n, n, n), complex)
    holo = np.zeros((n, n, n), complex)
    mixed = np.zeros((n, n, n), complex)
    T = np.zeros((n, n, n), complex)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    chern[k, i, j] += up(k, l) * d[i, j, l]
                    holo[k, i, j] += 0.5 * up(k, l) * (d[i, j, l] + d[j, i, l])
                    mixed[k, i, j] += 0.5 * up(k, l) * (db[i, j, l] - db[l, j, i])
                    T[k, i, j] += up(k, l) * (d[i, j, l] - d[j, i, l])
    return chern, holo, mixed, T


@pytest.mark.parametrize("n, seed", [(2, 0), (2, 5), (3, 11)])
def test_symbols_match_brute_force(n, seed):
    entry = zoo.random_metric(n, seed=seed)
    p = entry.sample(1, seed=seed + 100)[0]
    cs = christoffels(entry.jet(p))
    ts = torsion(entry.jet(p))
    chern, holo, mixed, T = _brute_symbols(entry.field, p)
    assert np.allclose(cs.chern, chern, atol=1e-8)
    assert np.allclose(cs.lc_holo, holo, atol=1e-8)
    assert np.allclose(cs.lc_mixed, mixed, atol=1e-8)
    assert np.allclose(ts.T, T, atol=1e-8)


def test_gamma_torsion_relation_random_n3():
    entry = zoo.random_metric(3, seed=11)
    jet = entry.jet(entry.sample(30, seed=1))
    assert np.max(gamma_torsion_relation_residual(jet)) < 1e-10
    assert np.max(lee_trace_residual(jet)) < 1e-10


def test_literal_index_reading_differs():
    # the relation only holds with the lower holomorphic index of h paired with the free index j
    entry = zoo.random_metric(2, seed=3)
    jet = entry.jet(entry.sample(5, seed=2))
    M = np.linalg.inv(jet.h)
    T = torsion(jet).T
    literal = 0.5 * np.einsum("...qip,...qk,...pj->...kij", np.conj(T), jet.h, M)
    assert np.max(np.abs(literal - christoffels(jet).lc_mixed)) > 1e-3
    assert np.max(np.abs(gamma_from_torsion(jet) - christoffels(jet).lc_mixed)) < 1e-12


@given(st.integers(0, 500), st.sampled_from([2, 3]))
def test_unconditional_connection_identities(seed, n):
    entry = zoo.random_metric(n, seed=seed, check_points=500, verify=False)
    jet = entry.jet(entry.sample(5, seed=seed))
    assert np.max(gamma_torsion_relation_residual(jet)) < 1e-10
    assert np.max(lee_trace_residual(jet)) < 1e-10
    ts = torsion(jet)
    assert np.allclose(ts.T, -np.swapaxes(ts.T, -1, -2), atol=1e-15)
    a10, a01 = adjoint_torsion_forms(ts)
    assert np.allclose(form_norm_sq(a10, h=jet.h), form_norm_sq(a01, h=jet.h))


def test_torsion_derivatives_match_finite_differences():
    entry = zoo.random_metric(3, seed=8)
    p = entry.sample(1, seed=3)[0]
    dT, dbarT = torsion_derivatives(entry.jet(p))
    d, db = wirtinger_fd(lambda q: torsion(entry.jet(q)).trace, p)
    assert np.allclose(dT, d, atol=1e-8)
    assert np.allclose(dbarT, db, atol=1e-8)
