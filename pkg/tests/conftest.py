import numpy as np
import pytest

from hef.bielliptic import build_family
from hef.curves import curve_from_coefficients, curve_from_roots
from hef.reduction import ReductionContext, curve_tools

REFERENCE = (1 / 3, 2.0, 3.0)


@pytest.fixture(scope="session")
def family():
    return build_family(*REFERENCE)


@pytest.fixture(scope="session")
def ctx(family):
    return ReductionContext.build(family)


@pytest.fixture(scope="session")
def lemniscate():
    curve = curve_from_coefficients(1, [0, -1, 0])
    return curve, curve_tools(curve)


@pytest.fixture(scope="session")
def tilted_genus2():
    # complex branch points, so nothing relies on real-axis symmetry
    curve = curve_from_roots([-1.2 + 0.3j, -0.4 - 0.5j, 0.1 + 0.6j, 0.9 - 0.2j, 1.7 + 0.4j])
    return curve, curve_tools(curve)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
