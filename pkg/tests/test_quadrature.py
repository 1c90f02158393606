import math

import numpy as np
import pytest

from core.quadrature import CumulativeIntegral, QuadratureError, adaptive_simpson


def test_simpson_sine() -> None:
    assert adaptive_simpson(math.sin, 0.0, math.pi, tol=1e-12) == pytest.approx(2.0, abs=1e-11)


def test_simpson_reversed_limits_and_empty_interval() -> None:
    forward = adaptive_simpson(math.exp, 0.0, 1.0)
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-forward, abs=1e-12)
    assert adaptive_simpson(math.exp, 0.5, 0.5) == 0.0


def test_simpson_oscillating_integrand() -> None:
    # integral of cos(exp(2u)) from 0 to 0.8 via the substitution w = exp(2u)
    value = adaptive_simpson(lambda u: math.cos(math.exp(2 * u)), 0.0, 0.8, tol=1e-12)
    reference = adaptive_simpson(lambda w: math.cos(w) / (2 * w), 1.0, math.exp(1.6), tol=1e-13)
    assert value == pytest.approx(reference, abs=1e-10)


def test_simpson_rejects_non_positive_tolerance() -> None:
    with pytest.raises(ValueError):
        adaptive_simpson(math.sin, 0.0, 1.0, tol=0.0)


def test_simpson_gives_up_on_divergent_integrand() -> None:
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: 0.0 if x == 0 else 1.0 / x, 0.0, 1.0, tol=1e-10, max_depth=12)
    assert issubclass(QuadratureError, ArithmeticError)


def test_cumulative_integral_matches_antiderivative() -> None:
    integral = CumulativeIntegral(math.cos, tol=1e-12)
    for x in (0.25, 0.5, 1.0, 2.0, 0.75, -1.0):
        assert integral(x) == pytest.approx(math.sin(x), abs=1e-10)
    # 0 plus six checkpoints
    assert len(integral) == 7
    assert integral(1.0) == pytest.approx(math.sin(1.0), abs=1e-10)
    assert len(integral) == 7


def test_cumulative_integral_cache_is_bounded() -> None:
    integral = CumulativeIntegral(math.cos, tol=1e-12, max_checkpoints=16)
    for x in np.linspace(-1.0, 3.0, 101):
        assert integral(x) == pytest.approx(math.sin(x), abs=1e-9)
        assert len(integral) <= 16
    assert integral(0.0) == 0.0
    with pytest.raises(ValueError):
        CumulativeIntegral(math.cos, max_checkpoints=1)
