import numpy as np
import pytest

from hermgeom import zoo
from hermgeom.curvature import chern_ricci, lc_ricci1
from hermgeom.errors import DimensionError, HermGeomError, MetricError
from hermgeom.identities import q_tensor
from hermgeom.jets import MetricField
from hermgeom.quadrature import HopfAnnulus, TorusCell

P0 = np.array([1.0, 0.0], complex)


def test_hopf_entry(hopf4):
    assert hopf4.n == 2 and hopf4.params == {"c": 4.0}
    assert isinstance(hopf4.domain, HopfAnnulus)
    assert {"gauduchon", "whe", "skew_lee"} <= hopf4.properties
    jet = hopf4.jet(P0)
    assert np.allclose(jet.h, 4 * np.eye(2))
    assert np.allclose(chern_ricci(jet)[1].coeff, 0.25 * jet.h)
    assert hopf4.known_facts["ricci2_over_omega"]["value"] == 0.25


def test_hopf_c1():
    entry = zoo.hopf(1.0)
    jet = entry.jet(entry.sample(10))
    assert np.allclose(chern_ricci(jet)[1].coeff, jet.h, atol=1e-13)


def test_hopf_samples_lie_in_annulus(hopf4):
    r = np.linalg.norm(hopf4.sample(1000, seed=3), axis=-1)
    assert np.all((r >= 1) & (r <= 2))


def test_hopf_rejects_bad_c():
    with pytest.raises(ValueError):
        zoo.hopf(0)


def test_flat_torus_entry(flat2):
    jet = flat2.jet(flat2.sample(10))
    r1, r2, _ = chern_ricci(jet)
    for arr in (r1.coeff, r2.coeff, lc_ricci1(jet).coeff, q_tensor(jet).coeff):
        assert not np.any(arr)
    assert isinstance(flat2.domain, TorusCell)


def test_fubini_study_at_origin(fs2):
    jet = fs2.jet(np.zeros(2))
    assert np.allclose(jet.h, np.eye(2), atol=0)
    assert np.allclose(chern_ricci(jet)[0].coeff, 3 * np.eye(2), atol=1e-14)


def test_random_metric_positive_definite():
    entry = zoo.random_metric(2, seed=42, amplitude=0.05)
    pts = entry.domain.sample_uniform(10_000, np.random.default_rng(0))
    assert np.min(np.linalg.eigvalsh(entry.field.matrix(pts))) > 0


def test_random_metric_is_seeded():
    a, b = zoo.random_metric(3, seed=9), zoo.random_metric(3, seed=9)
    pts = a.sample(5)
    assert np.array_equal(a.field.matrix(pts), b.field.matrix(pts))
    c = zoo.random_metric(3, seed=10)
    assert not np.array_equal(a.field.matrix(pts), c.field.matrix(pts))


def test_random_metric_gives_up_on_huge_amplitude():
    with pytest.raises(MetricError, match="amplitude"):
        zoo.random_metric(2, seed=0, amplitude=50.0, max_tries=3, verify=False)


def test_periodic_torus_is_periodic():
    entry = zoo.periodic_torus(2, seed=1)
    pts = entry.sample(20, seed=4)
    h = entry.field.matrix(pts)
    for shift in ([1, 0], [0, 1j], [1j, 1]):
        assert np.allclose(entry.field.matrix(pts + np.array(shift)), h, atol=1e-12)


def test_jet_check_catches_wrong_jets(hopf4):
    wrong = MetricField(2, "bad", lambda p: zoo._hopf_jet(p, 3.0), hopf4.field.matrix, hopf4.field.valid)
    assert np.max(zoo.jet_check(wrong, hopf4.sample(3))) > 1e-2
    entry = zoo.ZooEntry("bad", 2, {}, wrong, hopf4.domain)
    with pytest.raises(HermGeomError, match="finite-difference"):
        zoo._register(entry, verify=True)


@pytest.mark.parametrize("name, params", [
    ("hopf", {}), ("hopf", {"c": 1.0}), ("flat_torus", {"n": 3}), ("fubini_study", {"n": 2}),
    ("fubini_study", {"n": 3}), ("random_metric", {"n": 2, "seed": 3}), ("random_metric", {"n": 3, "seed": 4}),
    ("periodic_torus", {"seed": 2}),
])
def test_registry_entries_pass_jet_check(name, params):
    entry = zoo.get_entry(name, **params)
    assert np.max(zoo.jet_check(entry.field, entry.sample(20, seed=1))) < 1e-6


def test_registry_lookup_errors():
    with pytest.raises(KeyError, match="available"):
        zoo.get_entry("klein_bottle")
    with pytest.raises(DimensionError):
        zoo.flat_torus(0)


def test_list_entries_summaries():
    names = [s["name"] for s in zoo.list_entries()]
    assert names == list(zoo.REGISTRY)
