import numpy as np
import pytest

from aotomo import config as cfgmod
from aotomo.geometry import Aperture, AtmosphereConfig, GuideStar, TorusDomain, choose_torus_halfwidth

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def preset_objects(name, n):
    doc = cfgmod.preset(name)
    doc["grid_n"] = n
    atm = cfgmod.atmosphere(doc)
    ap = cfgmod.aperture(doc)
    return atm, ap, TorusDomain(choose_torus_halfwidth(atm, ap, n), n)


@pytest.fixture(scope="session")
def maory256():
    return preset_objects("maory-ngs6", 256)


@pytest.fixture(scope="session")
def maory64():
    return preset_objects("maory-ngs6", 64)


@pytest.fixture(scope="session")
def mixed64():
    return preset_objects("mixed-ngs-lgs", 64)


@pytest.fixture(scope="session")
def aligned():
    """Two stars, two layers, footprints disjoint and shifted by whole cells."""
    rho = 2.0 ** -13
    atm = AtmosphereConfig([2.5 / rho, 4.5 / rho], [GuideStar((rho, 0.0)), GuideStar((-rho, 0.0))])
    return atm, Aperture.disk(4.0), TorusDomain(8.0, 64)


@pytest.fixture
def record():
    def _record(name, passed, detail):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
