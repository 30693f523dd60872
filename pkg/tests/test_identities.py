import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hermgeom import zoo
from hermgeom.errors import DimensionError
from hermgeom.identities import (CONDITIONAL, UNCONDITIONAL, adjoint_torsion_norm_sq,
                                 curvature_relation_residual, dd_star_omega, ddbar_omega_residual,
                                 equation_S_residual, identity_residuals, identity_suite,
                                 lambda_ddbar_omega, nabla_theta_symmetric_norm, norm11, q_tensor,
                                 surface_gamma_torsion_residual, surface_q_identity_residual, whe_check)
from hermgeom.tensors import trace_lambda

from conftest import random_points, wirtinger_fd

P0 = np.array([1.0, 0.0], complex)


def test_hopf_component_anchors(hopf4):
    jet = hopf4.jet(P0)
    assert np.allclose(q_tensor(jet).coeff, np.eye(2), atol=1e-15)
    assert np.isclose(adjoint_torsion_norm_sq(jet), 0.25)
    assert np.allclose(lambda_ddbar_omega(jet).coeff, 0, atol=1e-15)
    assert np.allclose(curvature_relation_residual(jet).coeff, 0, atol=1e-15)
    assert np.allclose(surface_q_identity_residual(jet).coeff, 0, atol=1e-15)
    assert np.allclose(surface_gamma_torsion_residual(jet).coeff, 0, atol=1e-12)


def test_equation_S_hand_anchor(hopf4):
    jet = hopf4.jet(P0)
    a, b = dd_star_omega(jet)
    assert np.allclose((a + b).coeff, np.diag([0, 2]), atol=1e-14)
    assert np.allclose(equation_S_residual(jet).coeff, 0, atol=1e-14)


def test_ddbar_omega_matches_fd_of_metric():
    # independent route: i (d1 d1bar h22 + d2 d2bar h11 - d1 d2bar h21 - d2 d1bar h12) by nested differences
    entry = zoo.random_metric(2, seed=13)
    p = entry.sample(1, seed=2)[0]
    hm = lambda q: entry.field.matrix(q[None])[0]
    dbar = lambda q: wirtinger_fd(hm, q, step=1e-4)[1]  # [l, i, j] = dbar_l h_ij
    d, _ = wirtinger_fd(dbar, p, step=1e-4)  # [k, l, i, j]
    expect = 1j * (d[0, 0, 1, 1] + d[1, 1, 0, 0] - d[0, 1, 1, 0] - d[1, 0, 0, 1])
    assert np.isclose(ddbar_omega_residual(entry.jet(p)), expect, atol=1e-5)


def test_ddbar_omega_on_hopf_and_kahler(hopf4, fs2):
    assert np.max(np.abs(ddbar_omega_residual(hopf4.jet(hopf4.sample(50, seed=1))))) < 1e-10
    assert np.max(np.abs(ddbar_omega_residual(fs2.jet(fs2.sample(20))))) < 1e-12
    generic = zoo.random_metric(2, seed=5)
    assert np.max(np.abs(ddbar_omega_residual(generic.jet(generic.sample(20))))) > 1e-4


def test_lambda_ddbar_omega_is_hermitian():
    entry = zoo.random_metric(3, seed=4)
    assert lambda_ddbar_omega(entry.jet(entry.sample(10))).is_real(1e-12)


def test_q_vanishes_for_kahler(fs2):
    jet = fs2.jet(fs2.sample(10))
    assert np.max(np.abs(q_tensor(jet).coeff)) < 1e-13


@given(st.integers(0, 1000), st.sampled_from([2, 3]))
def test_q_is_psd_and_relation_holds(seed, n):
    entry = zoo.random_metric(n, seed=seed, check_points=500, verify=False)
    jet = entry.jet(entry.sample(5, seed=seed))
    q = q_tensor(jet).coeff
    assert np.min(np.linalg.eigvalsh(0.5 * (q + np.conj(np.swapaxes(q, -1, -2))))) >= -1e-12
    assert np.max(norm11(curvature_relation_residual(jet), jet)) < 1e-8


@given(st.integers(0, 1000), st.floats(0.01, 0.3))
def test_surface_identities_unconditional(seed, amplitude):
    entry = zoo.random_metric(2, seed=seed, amplitude=amplitude, check_points=500, max_tries=200,
                              verify=False)
    jet = entry.jet(entry.sample(5, seed=seed))
    assert np.max(norm11(surface_q_identity_residual(jet), jet)) < 1e-8
    assert np.max(norm11(surface_gamma_torsion_residual(jet), jet)) < 1e-8


def test_surface_only_identities_reject_n3():
    jet = zoo.random_metric(3, seed=1).jet(random_points(2, 3, 0.2))
    for fn in (surface_q_identity_residual, surface_gamma_torsion_residual, equation_S_residual):
        with pytest.raises(DimensionError):
            fn(jet)
    with pytest.raises(DimensionError):
        ddbar_omega_residual(jet)


def test_hopf_skew_lee_and_equation_S(hopf4):
    jet = hopf4.jet(hopf4.sample(50, seed=9))
    assert np.max(nabla_theta_symmetric_norm(jet)) < 1e-9
    assert np.max(norm11(equation_S_residual(jet), jet)) < 1e-9


def test_gauduchon_trace_on_hopf(hopf4):
    jet = hopf4.jet(hopf4.sample(20, seed=2))
    a, b = dd_star_omega(jet)
    t = adjoint_torsion_norm_sq(jet)
    assert np.allclose(trace_lambda(a, h=jet.h), t, atol=1e-12)
    assert np.allclose(trace_lambda(b, h=jet.h), t, atol=1e-12)


def test_whe_hopf(hopf4):
    w = whe_check(hopf4.field, hopf4.sample(100, seed=0))
    assert np.max(np.abs(w.u - 0.25)) < 1e-9
    assert abs(w.lambda_estimate) < 1e-9 and w.constancy_spread < 1e-9
    assert w.proportionality_residual < 1e-9


def test_whe_flat(flat2):
    w = whe_check(flat2.field, flat2.sample(10))
    assert np.all(w.u == 0) and w.lambda_estimate == 0 and w.proportionality_residual == 0


def test_whe_fubini_study(fs2):
    w = whe_check(fs2.field, fs2.sample(20))
    assert np.allclose(w.u, 3, atol=1e-10)
    assert abs(w.lambda_estimate - 3) < 1e-10
    assert w.proportionality_residual < 1e-9


def test_generic_metric_probes_recorded():
    entry = zoo.random_metric(2, seed=5)
    jet = entry.jet(entry.sample(20))
    assert np.max(nabla_theta_symmetric_norm(jet)) > 1e-4
    assert whe_check(jet).proportionality_residual > 1e-4


def test_suite_hopf_all_pass(hopf4):
    reports = identity_suite(hopf4.jet(hopf4.sample(50)), hopf4.properties)
    assert {r.identity for r in reports} == set(UNCONDITIONAL) | set(CONDITIONAL)
    assert all(r.verdict == "pass" for r in reports), [r.to_dict() for r in reports if r.verdict != "pass"]


def test_suite_random_metric_marks_conditionals():
    entry = zoo.random_metric(2, seed=42)
    reports = {r.identity: r for r in identity_suite(entry.jet(entry.sample(20)), entry.properties)}
    for name in ("curvature_relation", "surface_q_identity", "gamma_torsion_relation"):
        assert reports[name].verdict == "pass"
    for name in CONDITIONAL:
        assert reports[name].verdict == "not-applicable"


def test_suite_flat_and_fs(flat2, fs2):
    for entry in (flat2, fs2):
        reports = identity_suite(entry.jet(entry.sample(20)), entry.properties)
        assert all(r.verdict == "pass" for r in reports)


def test_suite_n3_skips_surface_identities():
    entry = zoo.random_metric(3, seed=0)
    names = set(identity_residuals(entry.jet(entry.sample(5))))
    assert "surface_q_identity" not in names and "equation_S" not in names
    assert "curvature_relation" in names


def test_suite_fails_when_claimed_property_is_false():
    entry = zoo.random_metric(2, seed=1)
    reports = identity_suite(entry.jet(entry.sample(10)), {"whe"})
    assert {r.identity: r.verdict for r in reports}["whe_proportionality"] == "fail"
