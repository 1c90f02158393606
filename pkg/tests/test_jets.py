import math

import numpy as np
import pytest

from core import jets


def _exp_series(rate: float, length: int) -> np.ndarray:
    return np.array([rate ** k / math.factorial(k) for k in range(length)])


def test_derivative_conversion() -> None:
    values = np.array([1.0, 2.0, 8.0, 48.0])
    coeffs = jets.from_derivatives(values)
    assert coeffs.tolist() == [1.0, 2.0, 4.0, 8.0]


def test_differentiate_shortens_series() -> None:
    cubic = np.array([0.0, 0.0, 0.0, 1.0])
    assert jets.differentiate(cubic).tolist() == [0.0, 0.0, 3.0]
    with pytest.raises(ValueError):
        jets.differentiate(np.array([1.0]))


def test_cauchy_product_of_exponentials() -> None:
    a = _exp_series(1.0, 6)[:, None]
    b = _exp_series(1.0, 6)[:, None]
    product = jets.cauchy("i,i->i", a, b)[:, 0]
    assert np.allclose(product, _exp_series(2.0, 6))


def test_cauchy_contracts_tensors() -> None:
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(3, 2, 2)), rng.normal(size=(4, 2))
    out = jets.cauchy("ij,j->i", a, b)
    assert out.shape == (3, 2)
    assert np.allclose(out[1], a[0] @ b[1] + a[1] @ b[0])


def test_matrix_inverse_series() -> None:
    b = np.array([[0.0, 1.0], [-2.0, 0.5]])
    series = np.stack([np.eye(2), b, np.zeros((2, 2)), np.zeros((2, 2))])
    inverse = jets.matrix_inverse(series)
    # (I + tB)^-1 = sum (-tB)^k
    expected = [np.linalg.matrix_power(-b, k) for k in range(4)]
    assert np.allclose(inverse, np.stack(expected))
