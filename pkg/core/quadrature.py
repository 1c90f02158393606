"""
FrameCurve - Quadrature Module
Tích phân Simpson thích nghi và tích phân tích lũy cho các nút integral lồng nhau.
"""

import bisect
import logging
from typing import Callable

from config import DEFAULTS, TOLERANCES

logger = logging.getLogger(__name__)

MIN_DEPTH = 3


class QuadratureError(ArithmeticError):
    """Adaptive Simpson did not reach the tolerance within the depth limit."""


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = TOLERANCES["quad_tol"],
    max_depth: int = DEFAULTS["quad_max_depth"],
) -> float:
    """
    Tích phân Simpson thích nghi của f trên [a, b]

    Args:
        f: integrand
        a, b: limits (b < a gives the signed integral)
        tol: absolute tolerance
        max_depth: maximum bisection depth

    Returns:
        Approximation of the integral with Richardson correction
    """
    if tol <= 0:
        raise ValueError("quad_tol must be positive")
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _refine(f, a, b, fa, fm, fb, whole, tol, max_depth, 0)


def _refine(f, a, b, fa, fm, fb, whole, tol, max_depth, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth >= MIN_DEPTH and (abs(delta) <= 15.0 * tol
                               or abs(delta) <= 1e-15 * abs(left + right)):
        return left + right + delta / 15.0
    if depth >= max_depth or m in (a, b):
        raise QuadratureError(
            f"Adaptive Simpson did not converge on [{a:.6g}, {b:.6g}] "
            f"(error estimate {abs(delta) / 15.0:.3g}, depth {max_depth})"
        )
    return (_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, max_depth, depth + 1)
            + _refine(f, m, b, fm, frm, fb, right, 0.5 * tol, max_depth, depth + 1))


class CumulativeIntegral:
    """
    F(x) = integral of f from 0 to x, accumulated along increasing samples

    Every evaluated x becomes a checkpoint; a new x is integrated only from the
    nearest checkpoint between 0 and x, so sampling an increasing grid costs one
    short quadrature per sample instead of one from 0. At most
    ``max_checkpoints`` are kept; a full cache drops every other checkpoint.
    """

    def __init__(
        self,
        integrand: Callable[[float], float],
        tol: float = TOLERANCES["quad_tol"],
        max_depth: int = DEFAULTS["quad_max_depth"],
        max_checkpoints: int = DEFAULTS["quad_checkpoints"],
    ):
        if max_checkpoints < 2:
            raise ValueError("max_checkpoints must be at least 2")
        self.integrand = integrand
        self.tol = tol
        self.max_depth = max_depth
        self.max_checkpoints = max_checkpoints
        self._xs = [0.0]
        self._values = [0.0]

    def __call__(self, x: float) -> float:
        x = float(x)
        idx = bisect.bisect_left(self._xs, x)
        if idx < len(self._xs) and self._xs[idx] == x:
            return self._values[idx]
        anchor = idx - 1 if x > 0 else idx
        value = self._values[anchor] + adaptive_simpson(
            self.integrand, self._xs[anchor], x, self.tol, self.max_depth
        )
        if idx == len(self._xs):
            self._xs.append(x)
            self._values.append(value)
        else:
            self._xs.insert(idx, x)
            self._values.insert(idx, value)
        if len(self._xs) > self.max_checkpoints:
            self._thin()
        return value

    def _thin(self) -> None:
        # giữ điểm 0 và một nửa số checkpoint còn lại
        start = bisect.bisect_left(self._xs, 0.0) % 2
        self._xs = self._xs[start::2]
        self._values = self._values[start::2]
        logger.debug("Cumulative integral cache thinned to %d checkpoints", len(self._xs))

    def __len__(self) -> int:
        return len(self._xs)
