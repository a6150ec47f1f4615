import numpy as np
import pytest

from plap.geometry import DensityModel, Domain, sample_cloud

# filled by the acceptance tests: criterion number -> (passed, description)
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def box2():
    return Domain("unit_box", 2)


@pytest.fixture
def box1():
    return Domain("unit_box", 1)


def uniform_cloud(n, d=2, seed=0, kind="unit_box"):
    dom = Domain(kind, d)
    return sample_cloud(n, dom, DensityModel.uniform(dom), seed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, text = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {text}")
