import time

import pytest
from hypothesis import settings

from weilmap.curve_jacobian import shielded_curve_system, torsion_points
from weilmap.descent_core import DescentContext
from weilmap.pairing import reference_parameters

settings.register_profile("desk", max_examples=30, deadline=None)
settings.load_profile("desk")


@pytest.fixture(scope="session")
def ref():
    return reference_parameters()


@pytest.fixture(scope="session")
def F(ref):
    return ref.tower


@pytest.fixture(scope="session")
def torsion(ref):
    return [P for P in torsion_points(ref.model, ref.ell) if P is not None]


@pytest.fixture(scope="session")
def shield(ref, torsion):
    return shielded_curve_system(ref.model, 1, avoid=torsion)


@pytest.fixture(scope="session")
def ctx(F):
    return DescentContext.random(F, 12)


@pytest.fixture(scope="session")
def ctx_prime(F):
    return DescentContext.random(F, 11, "u'")


@pytest.fixture(scope="session")
def timed_pipeline(ref):
    from weilmap.trilinear_pipeline import setup
    t0 = time.perf_counter()
    out = setup(ref, seed=0)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def pipeline(timed_pipeline):
    return timed_pipeline[0]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
