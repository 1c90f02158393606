import math

import numpy as np
import pytest

from core.ambient import ManifoldShape
from core.classify import analyse_curve
from utils.file_utils import load_curve_file


@pytest.fixture
def shape_11() -> ManifoldShape:
    return ManifoldShape(1, 1)


@pytest.fixture
def shape_22() -> ManifoldShape:
    return ManifoldShape(2, 2)


@pytest.fixture
def shape_14() -> ManifoldShape:
    return ManifoldShape(1, 4)


@pytest.fixture
def corrected_example1():
    return load_curve_file("example1-corrected")


@pytest.fixture
def printed_example1():
    return load_curve_file("example1")


@pytest.fixture
def geodesic():
    return load_curve_file("geodesic")


@pytest.fixture(scope="module")
def corrected_analysis():
    curve = load_curve_file("example1-corrected")
    return analyse_curve(curve.shape, curve, np.linspace(0.0, 2.0 * math.pi, 512))


@pytest.fixture(scope="session")
def example2_analysis():
    curve = load_curve_file("example2")
    return analyse_curve(curve.shape, curve)
