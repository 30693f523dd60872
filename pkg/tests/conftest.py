import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_RESULTS = {}


def wirtinger_fd(fn, point, step=1e-5):
    """Central-difference Wirtinger derivatives of an array-valued function of one point.

    Returns ``(d, dbar)`` with the derivative direction as the leading axis.
    """
    p = np.asarray(point, dtype=complex)
    n = p.shape[0]
    d, db = [], []
    for a in range(n):
        e = np.zeros(n, complex)
        e[a] = step
        fx = (fn(p + e) - fn(p - e)) / (2 * step)
        fy = (fn(p + 1j * e) - fn(p - 1j * e)) / (2 * step)
        d.append(0.5 * (fx - 1j * fy))
        db.append(0.5 * (fx + 1j * fy))
    return np.array(d), np.array(db)


def random_points(count, n, scale=0.4, seed=0):
    rng = np.random.default_rng(seed)
    return scale * (rng.uniform(-1, 1, (count, n)) + 1j * rng.uniform(-1, 1, (count, n)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])


@pytest.fixture(scope="session")
def hopf4():
    from hermgeom import zoo
    return zoo.hopf(4.0)


@pytest.fixture(scope="session")
def fs2():
    from hermgeom import zoo
    return zoo.fubini_study(2)


@pytest.fixture(scope="session")
def flat2():
    from hermgeom import zoo
    return zoo.flat_torus(2)
