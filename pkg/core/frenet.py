"""
FrameCurve - Frenet Module
Đạo hàm hiệp biến dọc đường cong, khung Frenet, độ cong và bốn toán tử
của vector độ cong trung bình (hai cách tính độc lập).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config import DEFAULTS, Tolerances
from core import jets
from core.ambient import ManifoldShape, Point, StructureConstants, Tangent, as_vector, get_structure
from core.curvelang import CurveDef, sample_jets
from core.synth import SampledCurve

logger = logging.getLogger(__name__)

MAX_ORDER = 4
OPERATOR_NAMES = ("nabla_H", "nabla_perp_H", "delta_H", "delta_perp_H")

CurveLike = Union[CurveDef, SampledCurve]


class JetOrderError(ValueError):
    """Not enough derivatives for the requested covariant derivative."""


class NotUnitSpeedError(ValueError):
    """Curve is not parametrized by arc length on the grid."""

    def __init__(self, max_deviation: float, worst_t: float, speed_tol: float):
        self.max_deviation = max_deviation
        self.worst_t = worst_t
        self.speed_tol = speed_tol
        super().__init__(
            f"Curve is not unit speed: | |T|_g - 1 | = {max_deviation:.3g} at t = {worst_t:.6g} "
            f"(speed_tol {speed_tol:g})")


class GridError(ValueError):
    """Grid unusable for finite differences."""


# ----------------------------------------------------------------------
# Grids and finite differences

def default_grid(c: CurveDef, n: int = DEFAULTS["grid_points"]) -> np.ndarray:
    lo, hi = c.t_range
    return np.linspace(lo, hi, n)


def grid_step(grid: Sequence[float]) -> float:
    """Bước của lưới đều; GridError nếu lưới không đều hoặc quá ngắn."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < DEFAULTS["fd_min_points"]:
        raise GridError(
            f"Grid needs at least {DEFAULTS['fd_min_points']} points for derivative estimates")
    steps = np.diff(grid)
    h = float(steps.mean())
    if h <= 0 or not np.allclose(steps, h, rtol=1e-6, atol=1e-12):
        raise GridError("Grid must be increasing and uniformly spaced")
    return h


def check_spacing(h: float, fd_tol: float, label: str = "") -> bool:
    """Lưới đủ mịn cho sai phân 5 điểm khi h^4 <= fd_tol; cảnh báo nếu không."""
    if h ** 4 <= fd_tol:
        return True
    logger.warning("Grid step %.4g for %s is too coarse: h^4 = %.3g exceeds fd_tol %.3g",
                   h, label or "curve", h ** 4, fd_tol)
    return False


def central_difference(values: np.ndarray, h: float, order: int = 1) -> np.ndarray:
    """
    Sai phân trung tâm 5 điểm theo trục đầu

    The two samples at each end are NaN.
    """
    f = np.asarray(values, dtype=float)
    if f.shape[0] < 5:
        raise GridError("Five-point stencil needs at least 5 samples")
    out = np.full_like(f, np.nan)
    if order == 1:
        out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    elif order == 2:
        out[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    else:
        raise ValueError(f"Unsupported stencil order {order}")
    return out


# ----------------------------------------------------------------------
# Covariant derivatives

def _nabla_series(connection: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Series of nabla_T V given A^k_j = Gamma^k_ij T^i as a series."""
    result = jets.differentiate(v)
    return result + jets.cauchy("kj,j->k", connection, v)[: result.shape[0]]


def covariant_chain(
    structure: StructureConstants,
    curve_derivs: np.ndarray,
    order: int,
    flat: bool = False,
) -> np.ndarray:
    """
    T, nabla_T T, ..., nabla_T^order T at one parameter value

    Args:
        structure: ambient structure constants
        curve_derivs: gamma, gamma', ..., gamma^(K) as rows (K >= order + 1)
        order: highest covariant derivative
        flat: force Gamma = 0 (plain derivatives)

    Returns:
        Array of shape (order + 1, dim)
    """
    curve_derivs = np.asarray(curve_derivs, dtype=float)
    if curve_derivs.shape[0] < order + 2:
        raise JetOrderError(
            f"nabla_T^{order} T needs derivatives up to order {order + 1}, "
            f"got {curve_derivs.shape[0] - 1}")
    shape = structure.shape
    coeffs = jets.from_derivatives(curve_derivs[: order + 2])
    tangent = jets.differentiate(coeffs)
    chain = [tangent]
    if flat:
        for _ in range(order):
            chain.append(jets.differentiate(chain[-1]))
    else:
        gamma = structure.christoffel_series(coeffs[: order + 1, shape.y_index])
        connection = jets.cauchy("kij,i->kj", gamma, tangent)
        for _ in range(order):
            chain.append(_nabla_series(connection, chain[-1]))
    return np.stack([series[0] for series in chain])


def covariant_derivative(
    shape: ManifoldShape,
    p: Union[Point, np.ndarray],
    v_jet: np.ndarray,
    k: int,
    flat: bool = False,
) -> Tangent:
    """
    nabla_T^k T tại p

    Args:
        shape: manifold shape
        p: curve point gamma(t)
        v_jet: T(t), T'(t), ..., T^(K-1)(t) as rows; needs at least k + 1 rows
        k: covariant derivative order (k >= 1)
        flat: ignore the connection (Euclidean oracle)
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    v_jet = np.atleast_2d(np.asarray(v_jet, dtype=float))
    if v_jet.shape[0] < k + 1:
        raise JetOrderError(f"nabla_T^{k} T needs {k + 1} tangent derivatives, got {v_jet.shape[0]}")
    derivs = np.vstack([as_vector(p)[None, :], v_jet[: k + 1]])
    chain = covariant_chain(get_structure(shape), derivs, k, flat=flat)
    return Tangent.from_vector(shape, chain[k])


@dataclass
class CovariantSamples:
    """
    Per-sample ambient data along a curve

    ``chain[j, k]`` holds nabla_T^k T at grid[j] for k = 0..4. In sampled mode
    the chain is built from finite differences and carries NaN rows near the
    ends (two more per side for every derivative level).
    """

    shape: ManifoldShape
    grid: np.ndarray
    points: np.ndarray
    chain: np.ndarray
    metrics: np.ndarray
    christoffels: np.ndarray
    exact: bool
    label: str = ""
    spacing_ok: bool = True

    @property
    def tangents(self) -> np.ndarray:
        return self.chain[:, 0]

    @property
    def step(self) -> float:
        return grid_step(self.grid)

    def inner(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Sample-wise g(u, v) for arrays of shape (n, dim)."""
        return np.einsum("ni,nij,nj->n", u, self.metrics, v)

    def norm(self, v: np.ndarray) -> np.ndarray:
        return np.sqrt(np.maximum(self.inner(v, v), 0.0))

    def connection(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("nkij,ni,nj->nk", self.christoffels, u, v)

    def derivative(self, field_values: np.ndarray) -> np.ndarray:
        """nabla_T of a vector field known on the grid (central differences)."""
        return central_difference(field_values, self.step) + self.connection(self.tangents, field_values)

    def project_normal(self, v: np.ndarray) -> np.ndarray:
        t = self.tangents
        return v - self.inner(v, t)[:, None] * t


def _point_tensors(structure: StructureConstants, points: np.ndarray):
    shape = structure.shape
    metrics = np.empty((points.shape[0], shape.dim, shape.dim))
    christoffels = np.empty((points.shape[0], shape.dim, shape.dim, shape.dim))
    for j, point in enumerate(points):
        y = point[shape.y_index]
        metrics[j] = structure.metric(y)
        christoffels[j] = structure.christoffel(y)
    return metrics, christoffels


def covariant_samples(
    shape: ManifoldShape,
    curve: CurveLike,
    grid: Optional[Sequence[float]] = None,
    tols: Optional[Tolerances] = None,
    flat: bool = False,
) -> CovariantSamples:
    """Sample the curve and its covariant derivative chain up to nabla_T^4 T."""
    tols = tols or Tolerances()
    structure = get_structure(shape)
    if curve.shape != shape:
        raise ValueError(f"Curve lives in m={curve.shape.m}, s={curve.shape.s}, "
                         f"not m={shape.m}, s={shape.s}")

    if isinstance(curve, SampledCurve):
        if grid is not None and not np.array_equal(np.asarray(grid, float), curve.grid):
            raise GridError("A sampled curve is analysed on its own grid")
        grid = curve.grid
        h = grid_step(grid)
        spacing_ok = check_spacing(h, tols.fd_tol, curve.label)
        points = curve.points
        metrics, christoffels = _point_tensors(structure, points)
        chain = np.empty((grid.shape[0], MAX_ORDER + 1, shape.dim))
        chain[:, 0] = curve.tangents
        for k in range(MAX_ORDER):
            previous = chain[:, k]
            correction = 0.0 if flat else np.einsum("nkij,ni,nj->nk", christoffels, curve.tangents, previous)
            chain[:, k + 1] = central_difference(previous, h) + correction
        logger.info("Sampled-mode covariant chain for %s on %d points", curve.label or "curve", grid.shape[0])
        return CovariantSamples(shape, grid, points, chain, metrics, christoffels, False, curve.label, spacing_ok)

    grid = default_grid(curve) if grid is None else np.asarray(grid, dtype=float)
    spacing_ok = check_spacing(grid_step(grid), tols.fd_tol, curve.label)
    derivs = sample_jets(curve, grid, DEFAULTS["jet_order"], tols.quad_tol)
    points = derivs[:, 0]
    metrics, christoffels = _point_tensors(structure, points)
    chain = np.stack([covariant_chain(structure, row, MAX_ORDER, flat=flat) for row in derivs])
    logger.info("Exact covariant chain for %s on %d points", curve.label or "curve", grid.shape[0])
    return CovariantSamples(shape, grid, points, chain, metrics, christoffels, True, curve.label, spacing_ok)


# ----------------------------------------------------------------------
# Arc length

@dataclass
class ArcLengthReport:
    speeds: np.ndarray
    max_deviation: float
    worst_t: float
    arc_length: float
    parameter_length: float
    speed_tol: float

    @property
    def unit_speed(self) -> bool:
        return self.max_deviation < self.speed_tol

    def to_dict(self) -> dict:
        return {
            "unit_speed": self.unit_speed,
            "max_speed_deviation": self.max_deviation,
            "worst_t": self.worst_t,
            "min_speed": float(np.min(self.speeds)),
            "max_speed": float(np.max(self.speeds)),
            "arc_length": self.arc_length,
            "parameter_length": self.parameter_length,
        }


def arc_length_report(samples: CovariantSamples, speed_tol: float) -> ArcLengthReport:
    """Tốc độ |gamma'|_g trên lưới và độ dài cung theo quy tắc hình thang."""
    speeds = samples.norm(samples.tangents)
    deviation = np.abs(speeds - 1.0)
    worst = int(np.argmax(deviation))
    steps = np.diff(samples.grid)
    arc = float(np.sum(0.5 * (speeds[1:] + speeds[:-1]) * steps))
    return ArcLengthReport(
        speeds=speeds,
        max_deviation=float(deviation[worst]),
        worst_t=float(samples.grid[worst]),
        arc_length=arc,
        parameter_length=float(samples.grid[-1] - samples.grid[0]),
        speed_tol=speed_tol,
    )


# ----------------------------------------------------------------------
# Frenet apparatus

@dataclass
class FrenetApparatus:
    """
    Khung Frenet E_1..E_r và độ cong kappa_1..kappa_{r-1} trên lưới

    ``frames`` has shape (n, 4, dim); vectors beyond r are zero. ``curvatures``
    has shape (n, 3) with zeros beyond r - 1. ``curvature_derivs`` holds
    kappa_1', kappa_1'', kappa_2' (NaN near the ends). ``e5`` is the
    auxiliary fifth direction from nabla_T^4 T (zero unless r = 4).
    """

    shape: ManifoldShape
    grid: np.ndarray
    r: int
    frames: np.ndarray
    curvatures: np.ndarray
    curvature_derivs: np.ndarray
    orders: np.ndarray
    e5: np.ndarray
    samples: CovariantSamples
    arc_length: ArcLengthReport
    tols: Tolerances = field(default_factory=Tolerances)

    @property
    def points(self) -> np.ndarray:
        return self.samples.points

    @property
    def tangents(self) -> np.ndarray:
        return self.frames[:, 0]

    def E(self, i: int) -> np.ndarray:
        """E_i for i = 1..5 (E_5 is the auxiliary direction)."""
        if i == 5:
            return self.e5
        return self.frames[:, i - 1]

    def kappa(self, i: int) -> np.ndarray:
        return self.curvatures[:, i - 1]

    @property
    def kappa1_prime(self) -> np.ndarray:
        return self.curvature_derivs[:, 0]

    @property
    def kappa1_second(self) -> np.ndarray:
        return self.curvature_derivs[:, 1]

    @property
    def kappa2_prime(self) -> np.ndarray:
        return self.curvature_derivs[:, 2]

    def interior(self) -> np.ndarray:
        """Samples where the frame and all curvature derivatives are defined."""
        return (np.all(np.isfinite(self.curvature_derivs), axis=1)
                & np.all(np.isfinite(self.frames.reshape(self.frames.shape[0], -1)), axis=1))

    def orthonormality_residual(self) -> float:
        """max |g(E_a, E_b) - delta_ab| over defined samples, a, b <= r."""
        rows = np.all(np.isfinite(self.frames.reshape(self.frames.shape[0], -1)), axis=1)
        frames = self.frames[rows, : self.r]
        gram = np.einsum("nai,nij,nbj->nab", frames, self.samples.metrics[rows], frames)
        if gram.size == 0:
            return float("nan")
        return float(np.max(np.abs(gram - np.eye(self.r))))

    def to_frame(self) -> pd.DataFrame:
        """Bảng CSV: t, tọa độ, độ cong và các thành phần khung."""
        dim = self.shape.dim
        table = {"t": self.grid}
        for i in range(dim):
            table[f"c{i + 1}"] = self.points[:, i]
        for i in range(3):
            table[f"kappa{i + 1}"] = self.curvatures[:, i]
        table["kappa1_prime"] = self.kappa1_prime
        table["kappa1_second"] = self.kappa1_second
        table["kappa2_prime"] = self.kappa2_prime
        table["order"] = self.orders
        for a in range(self.r):
            for i in range(dim):
                table[f"E{a + 1}_{i + 1}"] = self.frames[:, a, i]
        return pd.DataFrame(table)


def _gram_schmidt(chain_row: np.ndarray, metric: np.ndarray, rank_tol: float):
    """Frame, residual norms and detected order at one sample."""
    dim = chain_row.shape[1]
    frame = np.zeros((MAX_ORDER, dim))
    residuals = np.zeros(MAX_ORDER)
    speed = float(np.sqrt(max(chain_row[0] @ metric @ chain_row[0], 0.0)))
    frame[0] = chain_row[0] / speed
    residuals[0] = speed
    order = MAX_ORDER
    for k in range(1, MAX_ORDER):
        v = chain_row[k]
        w = v - sum((v @ metric @ frame[i]) * frame[i] for i in range(k))
        size = float(np.sqrt(max(w @ metric @ w, 0.0)))
        residuals[k] = size
        scale = max(1.0, float(np.sqrt(max(v @ metric @ v, 0.0))))
        if size < rank_tol * scale and order == MAX_ORDER:
            order = k
        if size > 0.0:
            frame[k] = w / size
    return frame, residuals, order


def _fifth_direction(v: np.ndarray, frame: np.ndarray, metric: np.ndarray, rank_tol: float) -> np.ndarray:
    w = v - sum((v @ metric @ e) * e for e in frame)
    size = float(np.sqrt(max(w @ metric @ w, 0.0)))
    scale = max(1.0, float(np.sqrt(max(v @ metric @ v, 0.0))))
    return w / size if size >= rank_tol * scale else np.zeros_like(v)


def _detected_order(orders: np.ndarray) -> int:
    valid = orders[orders > 0]
    if valid.size == 0:
        raise GridError("No sample with a defined Frenet frame")
    counts = np.bincount(valid, minlength=MAX_ORDER + 1)
    # argmax lấy cực đại đầu tiên, tức bậc nhỏ hơn khi bằng nhau
    return int(np.argmax(counts))


def frenet_apparatus(
    shape: ManifoldShape,
    c: CurveLike,
    grid: Optional[Sequence[float]] = None,
    tols: Optional[Tolerances] = None,
    samples: Optional[CovariantSamples] = None,
) -> FrenetApparatus:
    """
    Tính khung Frenet và độ cong

    Args:
        shape: manifold shape
        c: CurveDef (exact jets) or SampledCurve (finite differences)
        grid: uniform increasing grid (default: 512 points over the curve's
            t-range; ignored for sampled curves)
        tols: numeric thresholds
        samples: precomputed covariant samples to reuse

    Returns:
        FrenetApparatus

    Raises:
        NotUnitSpeedError: |T|_g deviates from 1 by speed_tol or more
        GridError: grid too short or not uniform
    """
    tols = tols or Tolerances()
    samples = samples or covariant_samples(shape, c, grid, tols)
    h = samples.step

    arc = arc_length_report(samples, tols.speed_tol)
    if not arc.unit_speed:
        raise NotUnitSpeedError(arc.max_deviation, arc.worst_t, tols.speed_tol)

    rank_tol = tols.rank_tol if samples.exact else tols.sampled_rank_tol
    n, dim = samples.grid.shape[0], shape.dim
    frames = np.full((n, MAX_ORDER, dim), np.nan)
    residuals = np.full((n, MAX_ORDER), np.nan)
    orders = np.zeros(n, dtype=int)
    e5 = np.full((n, dim), np.nan)

    for j in range(n):
        row = samples.chain[j]
        if not np.all(np.isfinite(row[:MAX_ORDER])):
            continue
        frames[j], residuals[j], orders[j] = _gram_schmidt(row[:MAX_ORDER], samples.metrics[j], rank_tol)
        if np.all(np.isfinite(row[MAX_ORDER])):
            e5[j] = _fifth_direction(row[MAX_ORDER], frames[j], samples.metrics[j], rank_tol)

    r = _detected_order(orders)
    defined = orders > 0
    frames[defined, r:] = 0.0
    if r < MAX_ORDER:
        e5[defined] = 0.0

    curvatures = np.zeros((n, 3))
    curvatures[~defined] = np.nan
    running = np.ones(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(1, r):
            curvatures[defined, k - 1] = residuals[defined, k] / running[defined]
            running = running * np.where(np.isfinite(curvatures[:, k - 1]), curvatures[:, k - 1], 1.0)

    curvature_derivs = np.column_stack([
        central_difference(curvatures[:, 0], h),
        central_difference(curvatures[:, 0], h, order=2),
        central_difference(curvatures[:, 1], h),
    ])

    off_order = int(np.count_nonzero(defined & (orders != r)))
    if off_order:
        logger.warning("%d of %d samples disagree with the detected order r=%d",
                       off_order, int(np.count_nonzero(defined)), r)
    logger.info("Frenet apparatus: r=%d on %d samples (%s mode)",
                r, n, "exact" if samples.exact else "sampled")

    fa = FrenetApparatus(shape, samples.grid, r, frames, curvatures, curvature_derivs,
                         orders, e5, samples, arc, tols)
    drift = fa.orthonormality_residual()
    if not drift < tols.frame_tol:
        logger.warning("Frame orthonormality residual %.3g exceeds frame_tol %g", drift, tols.frame_tol)
    return fa


def frenet_recursion_residual(fa: FrenetApparatus) -> float:
    """Sai số hệ Frenet: max |nabla_T E_i + kappa_{i-1} E_{i-1} - kappa_i E_{i+1}| tại các mẫu bên trong."""
    samples = fa.samples
    mask = fa.interior()
    worst = 0.0
    for i in range(1, min(fa.r, 3) + 1):
        lhs = samples.derivative(fa.E(i))
        expected = np.zeros_like(lhs)
        if i > 1:
            expected -= fa.kappa(i - 1)[:, None] * fa.E(i - 1)
        if i < 4:
            expected += fa.kappa(i)[:, None] * fa.E(i + 1)
        defect = samples.norm(np.nan_to_num(lhs - expected))
        rows = mask & np.all(np.isfinite(lhs), axis=1)
        if np.any(rows):
            worst = max(worst, float(np.max(defect[rows])))
    return worst


# ----------------------------------------------------------------------
# Mean curvature operators

@dataclass
class OperatorField:
    name: str
    grid: np.ndarray
    vectors: np.ndarray

    def norms(self, samples: CovariantSamples) -> np.ndarray:
        return samples.norm(np.nan_to_num(self.vectors))

    def defined(self) -> np.ndarray:
        return np.all(np.isfinite(self.vectors), axis=1)


def mean_curvature_ops_formula(fa: FrenetApparatus) -> Dict[str, OperatorField]:
    """Bốn toán tử từ độ cong và khung Frenet."""
    k1, k2, k3 = (fa.kappa(i)[:, None] for i in (1, 2, 3))
    k1p, k1pp, k2p = (fa.curvature_derivs[:, i][:, None] for i in range(3))
    E1, E2, E3, E4 = (fa.E(i) for i in (1, 2, 3, 4))

    nabla_perp_h = k1p * E2 + k1 * k2 * E3
    nabla_h = -k1 ** 2 * E1 + nabla_perp_h
    e3_term = -(2.0 * k1p * k2 + k1 * k2p) * E3
    e4_term = -k1 * k2 * k3 * E4
    delta_h = (3.0 * k1 * k1p * E1 + (k1 ** 3 + k1 * k2 ** 2 - k1pp) * E2 + e3_term + e4_term)
    delta_perp_h = (k1 * k2 ** 2 - k1pp) * E2 + e3_term + e4_term

    vectors = dict(zip(OPERATOR_NAMES, (nabla_h, nabla_perp_h, delta_h, delta_perp_h)))
    return {name: OperatorField(name, fa.grid, value) for name, value in vectors.items()}


def mean_curvature_ops_direct(
    shape: ManifoldShape,
    c: CurveLike,
    grid: Optional[Sequence[float]] = None,
    tols: Optional[Tolerances] = None,
    samples: Optional[CovariantSamples] = None,
) -> Dict[str, OperatorField]:
    """
    Bốn toán tử trực tiếp từ đạo hàm hiệp biến

    nabla_T H = nabla_T^2 T and Delta H = -nabla_T^3 T come from the chain;
    the normal-bundle versions remove the tangential part after every
    differentiation, the outer ones on the grid by central differences.
    """
    tols = tols or Tolerances()
    samples = samples or covariant_samples(shape, c, grid, tols)
    chain = samples.chain

    nabla_h = chain[:, 2]
    delta_h = -chain[:, 3]
    mean_curvature = samples.project_normal(chain[:, 1])
    nabla_perp_h = samples.project_normal(nabla_h)
    delta_perp_h = -samples.project_normal(samples.derivative(nabla_perp_h))

    vectors = dict(zip(OPERATOR_NAMES, (nabla_h, nabla_perp_h, delta_h, delta_perp_h)))
    logger.debug("Direct operators: |H| in [%.4g, %.4g]",
                 float(np.nanmin(samples.norm(np.nan_to_num(mean_curvature)))),
                 float(np.nanmax(samples.norm(np.nan_to_num(mean_curvature)))))
    return {name: OperatorField(name, samples.grid, value) for name, value in vectors.items()}


def operator_agreement(
    formula: Dict[str, OperatorField],
    direct: Dict[str, OperatorField],
    samples: CovariantSamples,
    mask: Optional[np.ndarray] = None,
) -> Dict[str, float]:
    """max g-norm of formula minus direct per operator, over common defined samples."""
    out = {}
    for name in OPERATOR_NAMES:
        a, b = formula[name], direct[name]
        rows = a.defined() & b.defined()
        if mask is not None:
            rows &= mask
        if not np.any(rows):
            out[name] = float("nan")
            continue
        diff = samples.norm(np.nan_to_num(a.vectors - b.vectors))
        out[name] = float(np.max(diff[rows]))
    return out
