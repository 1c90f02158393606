"""
FrameCurve - Truncated Taylor Series
Số học chuỗi Taylor cắt cụt cho đạo hàm hiệp biến dọc đường cong.

A series is a numpy array whose leading axis is the Taylor order:
``a[k] = f^(k)(t0) / k!``. Trailing axes hold the tensor components.
"""

import math

import numpy as np


def from_derivatives(values: np.ndarray) -> np.ndarray:
    """Giá trị đạo hàm f, f', f'', ... (trục đầu) -> hệ số Taylor."""
    values = np.asarray(values, dtype=float)
    scale = np.array([1.0 / math.factorial(k) for k in range(values.shape[0])])
    return values * scale.reshape((-1,) + (1,) * (values.ndim - 1))


def differentiate(a: np.ndarray) -> np.ndarray:
    """Đạo hàm d/dt của chuỗi; kết quả ngắn hơn một bậc."""
    if a.shape[0] < 2:
        raise ValueError("Series too short to differentiate")
    k = np.arange(1, a.shape[0], dtype=float)
    return a[1:] * k.reshape((-1,) + (1,) * (a.ndim - 1))


def cauchy(subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Tích Cauchy của hai chuỗi, contraction theo einsum

    Args:
        subscripts: einsum subscripts for one order, e.g. ``"ij,j->i"``
        a, b: series (leading axis = order)

    Returns:
        Series of length min(len(a), len(b))
    """
    n = min(a.shape[0], b.shape[0])
    terms = []
    for order in range(n):
        acc = np.einsum(subscripts, a[0], b[order])
        for k in range(1, order + 1):
            acc = acc + np.einsum(subscripts, a[k], b[order - k])
        terms.append(acc)
    return np.stack(terms)


def matrix_inverse(a: np.ndarray) -> np.ndarray:
    """Chuỗi nghịch đảo của chuỗi ma trận (a[0] khả nghịch)."""
    inv0 = np.linalg.inv(a[0])
    out = [inv0]
    for order in range(1, a.shape[0]):
        acc = np.zeros_like(inv0)
        for k in range(1, order + 1):
            acc = acc + a[k] @ out[order - k]
        out.append(-inv0 @ acc)
    return np.stack(out)
