import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from steklab.shapes import ShapeSpec, generate_shape, steklov_domain

settings.register_profile(
    "steklab", max_examples=30, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "steklab"))

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(
            f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record_criterion():
    def record(number, ok, detail=""):
        ACCEPTANCE[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
    return record


@pytest.fixture(scope="session")
def disk():
    return generate_shape(ShapeSpec("disk", {"h": 0.1}))


@pytest.fixture(scope="session")
def fine_disk():
    return generate_shape(ShapeSpec("disk", {"h": 0.05}))


@pytest.fixture(scope="session")
def annulus():
    return generate_shape(ShapeSpec("annulus", {"h": 0.05}))


@pytest.fixture(scope="session")
def rectangle():
    return generate_shape(ShapeSpec("rectangle"))


@pytest.fixture(scope="session")
def torus():
    return generate_shape(ShapeSpec("product_torus"))


@pytest.fixture(scope="session")
def torus_cylinder(torus):
    return steklov_domain(ShapeSpec("product_torus"), torus)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
