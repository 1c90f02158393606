"""
FrameCurve - Synthesis Module
Dựng các đường xoắn (helix) thỏa giả thiết định lý bằng cách tích phân
hệ Frenet trong không gian nền.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from config import DEFAULTS, TOLERANCES, Tolerances
from core.ambient import ManifoldShape, Point, Tangent, get_structure

logger = logging.getLogger(__name__)

FRAME_SIZE = 3


class SynthesisError(ValueError):
    """Invalid helix specification or non-convergent step control."""


def _near_legendre(theta: float) -> bool:
    """theta = pi/2 trong sai số góc legendre_angle_tol (vd. 1.5708)."""
    return abs(math.cos(theta)) < math.sin(TOLERANCES["legendre_angle_tol"])


@dataclass(frozen=True)
class HelixSpec:
    """
    Tham số của helix cần dựng

    Theorem 1: non-Legendre slant helix with kappa_3 = 0, needs
    cos(theta) < 0 and s cos^2(theta) < 1. Theorem 2: Legendre helix with
    kappa_2 = sqrt(s) and a free kappa_1 > 0.
    """

    shape: ManifoldShape
    theorem: int
    theta: Optional[float] = None
    kappa1: float = DEFAULTS["theorem2_kappa1"]
    t_span: Tuple[float, float] = DEFAULTS["synth_t_span"]
    step: float = DEFAULTS["synth_step"]
    samples: int = DEFAULTS["synth_samples"]

    def __post_init__(self):
        s = self.shape.s
        if self.theorem == 1:
            if self.theta is None:
                raise SynthesisError("Theorem 1 helix needs a contact angle theta")
            c = math.cos(self.theta)
            if _near_legendre(self.theta):
                raise SynthesisError(
                    f"theta = {self.theta:.6g} is the Legendre case cos(theta) = 0; use theorem 2")
            if s * c * c >= 1.0:
                raise SynthesisError(
                    f"|cos(theta)| = {abs(c):.6g} violates s cos^2(theta) < 1 (bound 1/sqrt(s) = {1 / math.sqrt(s):.6g})")
            if c > 0:
                raise SynthesisError("Theorem 1 needs cos(theta) < 0 so that kappa_1 > 0")
        elif self.theorem == 2:
            if self.theta is not None and not _near_legendre(self.theta):
                raise SynthesisError("Theorem 2 helices are Legendre: theta must be pi/2")
            object.__setattr__(self, "theta", math.pi / 2)
            if not self.kappa1 > 0:
                raise SynthesisError("kappa_1 must be positive")
        else:
            raise SynthesisError(f"Unknown theorem {self.theorem}; synthesis covers theorems 1 and 2")
        lo, hi = self.t_span
        if not hi > lo:
            raise SynthesisError(f"Empty t_span {self.t_span}")
        if self.step <= 0:
            raise SynthesisError("step must be positive")
        if self.samples < DEFAULTS["fd_min_points"]:
            raise SynthesisError(f"samples must be >= {DEFAULTS['fd_min_points']}")

    @property
    def cos_theta(self) -> float:
        return 0.0 if self.theorem == 2 else math.cos(self.theta)

    @property
    def curvatures(self) -> Tuple[float, float]:
        """(kappa_1, kappa_2) of the helix."""
        s = self.shape.s
        if self.theorem == 2:
            return self.kappa1, math.sqrt(s)
        c = self.cos_theta
        rest = 1.0 - s * c * c
        return -s * c * math.sqrt(rest), math.sqrt(s) * rest

    @property
    def lam(self) -> float:
        """Expected lambda of the matching C-parallel class."""
        k1, k2 = self.curvatures
        s = self.shape.s
        if self.theorem == 2:
            return k1 * k2 / math.sqrt(s)
        return -k1 * k1 / (s * self.cos_theta)

    def to_dict(self) -> dict:
        k1, k2 = self.curvatures
        return {
            "m": self.shape.m,
            "s": self.shape.s,
            "theorem": self.theorem,
            "theta": self.theta,
            "cos_theta": self.cos_theta,
            "kappa1": k1,
            "kappa2": k2,
            "lambda": self.lam,
            "t_span": list(self.t_span),
            "step": self.step,
            "samples": self.samples,
        }


@dataclass
class SampledCurve:
    """Đường cong cho dưới dạng mẫu: lưới, điểm, tiếp tuyến (và khung nếu có)."""

    shape: ManifoldShape
    grid: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    frames: Optional[np.ndarray] = None
    label: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        self.tangents = np.asarray(self.tangents, dtype=float)
        n, dim = self.grid.shape[0], self.shape.dim
        if self.points.shape != (n, dim) or self.tangents.shape != (n, dim):
            raise ValueError(f"Sampled curve arrays must have shape ({n}, {dim})")
        if not (np.all(np.isfinite(self.points)) and np.all(np.isfinite(self.tangents))):
            raise ValueError("Sampled curve has non-finite entries")

    def to_frame(self) -> pd.DataFrame:
        dim = self.shape.dim
        table = {"t": self.grid}
        for i in range(dim):
            table[f"c{i + 1}"] = self.points[:, i]
        for i in range(dim):
            table[f"T{i + 1}"] = self.tangents[:, i]
        if self.frames is not None:
            for a in range(1, self.frames.shape[1]):
                for i in range(dim):
                    table[f"E{a + 1}_{i + 1}"] = self.frames[:, a, i]
        return pd.DataFrame(table)

    @classmethod
    def from_frame(cls, shape: ManifoldShape, frame: pd.DataFrame, label: str = "") -> "SampledCurve":
        dim = shape.dim
        needed = ["t"] + [f"c{i + 1}" for i in range(dim)] + [f"T{i + 1}" for i in range(dim)]
        missing = [name for name in needed if name not in frame.columns]
        if missing:
            raise ValueError(f"Sampled curve table lacks columns: {', '.join(missing)}")
        return cls(
            shape=shape,
            grid=frame["t"].to_numpy(dtype=float),
            points=frame[[f"c{i + 1}" for i in range(dim)]].to_numpy(dtype=float),
            tangents=frame[[f"T{i + 1}" for i in range(dim)]].to_numpy(dtype=float),
            label=label,
        )


def initial_frame(spec: HelixSpec) -> Tuple[Point, Tangent, Tangent, Tangent]:
    """
    Khung ban đầu (p0, E1, E2, E3) tại gốc tọa độ

    T0 = cos(theta) xi_sum + sqrt(1 - s cos^2) u with u = X_1 at the origin,
    E2 = phi(T0) / |phi(T0)|, and E3 from xi_sum = s cos T + sqrt(s) sqrt(1 - s cos^2) E3.
    """
    shape = spec.shape
    structure = get_structure(shape)
    origin = Point.origin(shape)
    y = np.zeros(shape.m)
    s, c = shape.s, spec.cos_theta
    xi_sum = structure.xi_sum()
    u = structure.horizontal_frame(y)[0]
    rest = math.sqrt(1.0 - s * c * c)

    t0 = c * xi_sum + rest * u
    phi_t = structure.phi_matrix(y) @ t0
    e2 = phi_t / structure.norm(y, phi_t)
    e3 = (xi_sum - s * c * t0) / (math.sqrt(s) * rest)

    frame = np.stack([t0, e2, e3])
    gram = frame @ structure.metric(y) @ frame.T
    if np.max(np.abs(gram - np.eye(FRAME_SIZE))) > 1e-12:
        raise SynthesisError(f"Initial frame is not orthonormal (gram residual {np.max(np.abs(gram - np.eye(3))):.3g})")
    return (origin,) + tuple(Tangent.from_vector(shape, v) for v in frame)


def _frenet_rhs(structure, kappa1: float, kappa2: float):
    shape = structure.shape
    dim = shape.dim

    def rhs(state: np.ndarray) -> np.ndarray:
        point, e1, e2, e3 = state.reshape(1 + FRAME_SIZE, dim)
        gamma = structure.christoffel(point[shape.y_index])
        out = np.empty_like(state).reshape(1 + FRAME_SIZE, dim)
        out[0] = e1
        out[1] = -np.einsum("kij,i,j->k", gamma, e1, e1) + kappa1 * e2
        out[2] = -np.einsum("kij,i,j->k", gamma, e1, e2) - kappa1 * e1 + kappa2 * e3
        out[3] = -np.einsum("kij,i,j->k", gamma, e1, e3) - kappa2 * e2
        return out.reshape(-1)

    return rhs


def _rk4_run(rhs, state0: np.ndarray, grid: np.ndarray, substeps: int) -> np.ndarray:
    states = np.empty((grid.shape[0], state0.shape[0]))
    states[0] = state0
    state = state0.copy()
    for j in range(1, grid.shape[0]):
        h = (grid[j] - grid[j - 1]) / substeps
        for _ in range(substeps):
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * h * k1)
            k3 = rhs(state + 0.5 * h * k2)
            k4 = rhs(state + h * k3)
            state = state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[j] = state
    return states


def _frame_drift(structure, states: np.ndarray) -> float:
    shape = structure.shape
    worst = 0.0
    for row in states:
        point, *frame = row.reshape(1 + FRAME_SIZE, shape.dim)
        frame = np.stack(frame)
        gram = frame @ structure.metric(point[shape.y_index]) @ frame.T
        worst = max(worst, float(np.max(np.abs(gram - np.eye(FRAME_SIZE)))))
    return worst


def integrate(spec: HelixSpec, tols: Optional[Tolerances] = None) -> SampledCurve:
    """
    Tích phân hệ Frenet bằng RK4, chia đôi bước khi khung bị trôi

    Args:
        spec: helix specification
        tols: drift_tol is the allowed orthonormality drift per unit arc length

    Returns:
        SampledCurve on spec.samples uniform points of spec.t_span

    Raises:
        SynthesisError: drift still too large after the maximum number of halvings
    """
    tols = tols or Tolerances()
    shape = spec.shape
    structure = get_structure(shape)
    kappa1, kappa2 = spec.curvatures
    p0, e1, e2, e3 = initial_frame(spec)
    state0 = np.concatenate([p0.vector(), e1.vector(), e2.vector(), e3.vector()])

    grid = np.linspace(spec.t_span[0], spec.t_span[1], spec.samples)
    spacing = float(grid[1] - grid[0])
    substeps = max(1, math.ceil(spacing / spec.step - 1e-12))
    length = max(1.0, float(grid[-1] - grid[0]))
    rhs = _frenet_rhs(structure, kappa1, kappa2)

    for halving in range(DEFAULTS["synth_max_halvings"] + 1):
        states = _rk4_run(rhs, state0, grid, substeps)
        drift = _frame_drift(structure, states) / length
        logger.info("RK4 theorem-%d helix: step %.3g, drift %.3g per unit length",
                    spec.theorem, spacing / substeps, drift)
        if drift < tols.drift_tol:
            break
        substeps *= 2
    else:
        raise SynthesisError(
            f"Frame drift {drift:.3g} still above {tols.drift_tol:g} after "
            f"{DEFAULTS['synth_max_halvings']} step halvings")

    blocks = states.reshape(grid.shape[0], 1 + FRAME_SIZE, shape.dim)
    provenance = dict(spec.to_dict(), step_used=spacing / substeps, halvings=halving, drift=drift)
    label = f"theorem{spec.theorem}-helix(m={shape.m}, s={shape.s}, theta={spec.theta:.6g})"
    return SampledCurve(
        shape=shape,
        grid=grid,
        points=blocks[:, 0],
        tangents=blocks[:, 1],
        frames=blocks[:, 1:],
        label=label,
        provenance=provenance,
    )
