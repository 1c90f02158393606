"""
FrameCurve - Ambient Structure Module
Cấu trúc framed metric (phi, xi_alpha, eta^alpha, g) và liên thông Levi-Civita
của không gian mẫu R^{2m+s}(-3s).

Coordinates are ordered x_1..x_m, y_1..y_m, z_1..z_s. The structure tensors:

    eta^a = 1/2 (dz_a - sum_i y_i dx_i),   xi_a = 2 d/dz_a,
    g     = sum_a eta^a (x) eta^a + 1/4 sum_i (dx_i^2 + dy_i^2),
    phi(X d/dx + Y d/dy + Z d/dz) = Y d/dx - X d/dy + sum_a (sum_i Y_i y_i) d/dz_a.

The metric is assembled from the eta covectors, which are affine in y, so the
metric partials and Christoffel symbols are exact polynomials in y.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Sequence, Union

import numpy as np

from config import DEFAULTS, TOLERANCES
from core import jets

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifoldShape:
    """The pair (m, s) fixing R^{2m+s}(-3s)."""

    m: int
    s: int

    def __post_init__(self):
        for name in ("m", "s"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    @property
    def dim(self) -> int:
        return 2 * self.m + self.s

    @property
    def x_index(self) -> slice:
        return slice(0, self.m)

    @property
    def y_index(self) -> slice:
        return slice(self.m, 2 * self.m)

    @property
    def z_index(self) -> slice:
        return slice(2 * self.m, 2 * self.m + self.s)

    def split(self, vector: np.ndarray):
        """Tách vector tọa độ thành (x, y, z)."""
        vector = np.asarray(vector, dtype=float)
        return vector[..., self.x_index], vector[..., self.y_index], vector[..., self.z_index]

    def join(self, x: Sequence[float], y: Sequence[float], z: Sequence[float]) -> np.ndarray:
        vector = np.concatenate([np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)])
        if vector.shape != (self.dim,):
            raise ValueError(f"Expected {self.dim} components, got {vector.shape[0]}")
        return vector


def _check_finite(name: str, values) -> tuple:
    values = tuple(float(v) for v in values)
    if not all(np.isfinite(values)):
        raise ValueError(f"{name} has non-finite entries: {values}")
    return values


@dataclass(frozen=True)
class Point:
    """Coordinate position (x, y, z)."""

    x: tuple
    y: tuple
    z: tuple

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))

    @classmethod
    def from_vector(cls, shape: ManifoldShape, vector) -> "Point":
        x, y, z = shape.split(vector)
        return cls(tuple(x), tuple(y), tuple(z))

    @classmethod
    def origin(cls, shape: ManifoldShape) -> "Point":
        return cls((0.0,) * shape.m, (0.0,) * shape.m, (0.0,) * shape.s)

    def vector(self) -> np.ndarray:
        return np.array(self.x + self.y + self.z, dtype=float)


@dataclass(frozen=True)
class Tangent:
    """Coordinate components (dx, dy, dz) at an implicit base point."""

    dx: tuple
    dy: tuple
    dz: tuple

    def __post_init__(self):
        for name in ("dx", "dy", "dz"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))

    @classmethod
    def from_vector(cls, shape: ManifoldShape, vector) -> "Tangent":
        dx, dy, dz = shape.split(vector)
        return cls(tuple(dx), tuple(dy), tuple(dz))

    def vector(self) -> np.ndarray:
        return np.array(self.dx + self.dy + self.dz, dtype=float)


VectorLike = Union[Tangent, Point, Sequence[float], np.ndarray]


def as_vector(value: VectorLike) -> np.ndarray:
    if isinstance(value, (Tangent, Point)):
        return value.vector()
    return np.asarray(value, dtype=float)


class StructureConstants:
    """
    Closed-form components of g, phi, eta^a, xi_a for one ManifoldShape

    Every method taking ``y`` expects the m y-coordinates of the base point.
    The ``*_series`` methods take a Taylor series of y along a curve (leading
    axis = order) and return the matching series of the tensor.
    """

    def __init__(self, shape: ManifoldShape):
        self.shape = shape
        n, m, s = shape.dim, shape.m, shape.s
        xs, ys, zs = shape.x_index, shape.y_index, shape.z_index

        self._eta_base = np.zeros((s, n))
        for a in range(s):
            self._eta_base[a, zs.start + a] = 0.5

        # d/dy_l của hệ số dx_i trong eta^a
        self._eta_grad = np.zeros((s, n, n))
        for i in range(m):
            self._eta_grad[:, ys.start + i, xs.start + i] = -0.5

        self._flat = np.zeros((n, n))
        for i in range(2 * m):
            self._flat[i, i] = 0.25

        self._xi = np.zeros((s, n))
        for a in range(s):
            self._xi[a, zs.start + a] = 2.0

    # ------------------------------------------------------------------
    # Tensors at a point

    def eta_covectors(self, y) -> np.ndarray:
        """Row a holds the coordinate components of eta^a, shape (s, n)."""
        y = np.asarray(y, dtype=float)
        eta = self._eta_base.copy()
        eta[:, self.shape.x_index] -= 0.5 * y
        return eta

    def xi_vectors(self) -> np.ndarray:
        return self._xi

    def xi_sum(self) -> np.ndarray:
        return self._xi.sum(axis=0)

    def phi_matrix(self, y) -> np.ndarray:
        shape = self.shape
        y = np.asarray(y, dtype=float)
        n = shape.dim
        phi = np.zeros((n, n))
        xs, ys, zs = shape.x_index, shape.y_index, shape.z_index
        for i in range(shape.m):
            phi[xs.start + i, ys.start + i] = 1.0
            phi[ys.start + i, xs.start + i] = -1.0
        phi[zs, ys] = y
        return phi

    def phi_derivative(self, u, v) -> np.ndarray:
        """(D_u phi) v: directional derivative of the phi components along u."""
        shape = self.shape
        u, v = np.asarray(u, float), np.asarray(v, float)
        out = np.zeros(shape.dim)
        out[shape.z_index] = float(np.dot(u[shape.y_index], v[shape.y_index]))
        return out

    def metric(self, y) -> np.ndarray:
        eta = self.eta_covectors(y)
        return eta.T @ eta + self._flat

    def inverse_metric(self, y) -> np.ndarray:
        return np.linalg.inv(self.metric(y))

    def metric_partials(self, y) -> np.ndarray:
        """dG[l, i, j] = d g_ij / d u^l."""
        return self.partials_series(np.asarray(y, float)[None, :])[0]

    def christoffel(self, y) -> np.ndarray:
        """Gamma[k, i, j] of the Levi-Civita connection."""
        dg = self.metric_partials(y)
        lowered = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
        return np.einsum("kl,lij->kij", self.inverse_metric(y), lowered)

    def horizontal_frame(self, y) -> np.ndarray:
        """
        Orthonormal basis of ker(eta): rows X_1..X_m, Y_1..Y_m with
        X_i = 2(d/dx_i + y_i sum_a d/dz_a) and Y_i = 2 d/dy_i = -phi(X_i).
        """
        shape = self.shape
        y = np.asarray(y, dtype=float)
        frame = np.zeros((2 * shape.m, shape.dim))
        for i in range(shape.m):
            frame[i, shape.x_index.start + i] = 2.0
            frame[i, shape.z_index] = 2.0 * y[i]
            frame[shape.m + i, shape.y_index.start + i] = 2.0
        return frame

    # ------------------------------------------------------------------
    # Series along a curve

    def eta_series(self, y_series: np.ndarray) -> np.ndarray:
        y_series = np.asarray(y_series, dtype=float)
        out = np.zeros((y_series.shape[0],) + self._eta_base.shape)
        out[0] = self._eta_base
        out[:, :, self.shape.x_index] -= 0.5 * y_series[:, None, :]
        return out

    def metric_series(self, y_series: np.ndarray) -> np.ndarray:
        eta = self.eta_series(y_series)
        g = jets.cauchy("ai,aj->ij", eta, eta)
        g[0] = g[0] + self._flat
        return g

    def partials_series(self, y_series: np.ndarray) -> np.ndarray:
        eta = self.eta_series(y_series)
        grad = self._eta_grad
        return (np.einsum("ali,kaj->klij", grad, eta)
                + np.einsum("kai,alj->klij", eta, grad))

    def christoffel_series(self, y_series: np.ndarray) -> np.ndarray:
        dg = self.partials_series(y_series)
        # loại một: Gamma_{l,ij} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        lowered = 0.5 * (np.einsum("kijl->klij", dg)
                         + np.einsum("kjil->klij", dg)
                         - dg)
        inverse = jets.matrix_inverse(self.metric_series(y_series))
        return jets.cauchy("kl,lij->kij", inverse, lowered)

    # ------------------------------------------------------------------

    def connection(self, y, u, v) -> np.ndarray:
        """Gamma^k_ij u^i v^j at the point with y-coordinates y."""
        return np.einsum("kij,i,j->k", self.christoffel(y), u, v)

    def norm(self, y, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(max(v @ self.metric(y) @ v, 0.0)))


@lru_cache(maxsize=None)
def get_structure(shape: ManifoldShape) -> StructureConstants:
    """Factory: mỗi shape một StructureConstants (có cache)."""
    return StructureConstants(shape)


def _check_alpha(shape: ManifoldShape, alpha: int) -> int:
    if not 1 <= alpha <= shape.s:
        raise IndexError(f"alpha must lie in 1..{shape.s}, got {alpha}")
    return alpha - 1


def _y_of(shape: ManifoldShape, p: VectorLike) -> np.ndarray:
    return shape.split(as_vector(p))[1]


def eta(shape: ManifoldShape, alpha: int, p: VectorLike, v: VectorLike) -> float:
    """Giá trị eta^alpha(v) tại p."""
    a = _check_alpha(shape, alpha)
    return float(get_structure(shape).eta_covectors(_y_of(shape, p))[a] @ as_vector(v))


def xi(shape: ManifoldShape, alpha: int) -> Tangent:
    a = _check_alpha(shape, alpha)
    return Tangent.from_vector(shape, get_structure(shape).xi_vectors()[a])


def phi(shape: ManifoldShape, p: VectorLike, v: VectorLike) -> Tangent:
    matrix = get_structure(shape).phi_matrix(_y_of(shape, p))
    return Tangent.from_vector(shape, matrix @ as_vector(v))


def metric(shape: ManifoldShape, p: VectorLike, u: VectorLike, v: VectorLike) -> float:
    g = get_structure(shape).metric(_y_of(shape, p))
    return float(as_vector(u) @ g @ as_vector(v))


def christoffel(shape: ManifoldShape, p: VectorLike) -> np.ndarray:
    """Ký hiệu Christoffel Gamma[k, i, j] tại p, đối xứng theo (i, j)."""
    structure = get_structure(shape)
    y = _y_of(shape, p)
    if abs(np.linalg.det(structure.metric(y))) < 1e-300:
        raise ArithmeticError("Singular metric; structure constants are inconsistent")
    return structure.christoffel(y)


# ----------------------------------------------------------------------
# Axiom suite

TENSOR_AXIOMS = (
    "phi_squared",
    "eta_xi_duality",
    "phi_xi",
    "eta_phi",
    "compatibility",
    "eta_is_metric_dual",
    "xi_sum_norm",
    "metric_symmetric",
    "metric_positive",
)
CONNECTION_AXIOMS = ("nabla_phi", "nabla_xi", "christoffel_symmetric")


@dataclass
class AxiomReport:
    shape: ManifoldShape
    sample_count: int
    seed: int
    tol: float
    connection_tol: float
    residuals: Dict[str, float] = field(default_factory=dict)

    def limit(self, name: str) -> float:
        return self.connection_tol if name in CONNECTION_AXIOMS else self.tol

    @property
    def failures(self) -> Dict[str, float]:
        return {name: value for name, value in self.residuals.items()
                if not value < self.limit(name)}

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "m": self.shape.m,
            "s": self.shape.s,
            "samples": self.sample_count,
            "seed": self.seed,
            "tol": self.tol,
            "connection_tol": self.connection_tol,
            "residuals": dict(self.residuals),
            "failures": sorted(self.failures),
            "passed": self.passed,
        }


def verify_axioms(
    shape: ManifoldShape,
    sample_count: int = DEFAULTS["axiom_samples"],
    tol: float = TOLERANCES["axiom_tol"],
    seed: int = DEFAULTS["seed"],
    connection_tol: float = None,
) -> AxiomReport:
    """
    Kiểm tra các tiên đề của S-cấu trúc trên các điểm / vector ngẫu nhiên

    Args:
        shape: manifold shape
        sample_count: number of random (p, u, v) triples
        tol: limit for the pure tensor identities
        seed: RNG seed; coordinates are uniform in [-box, box]
        connection_tol: limit for the identities involving Christoffel
            symbols (default max(tol, configured connection_tol))

    Returns:
        AxiomReport with the maximum residual per identity
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if connection_tol is None:
        connection_tol = max(tol, TOLERANCES["connection_tol"])

    structure = get_structure(shape)
    rng = np.random.default_rng(seed)
    box = DEFAULTS["sample_box"]
    n, s = shape.dim, shape.s
    xi_vectors = structure.xi_vectors()
    xi_sum = structure.xi_sum()
    identity_s = np.eye(s)

    worst = {name: 0.0 for name in TENSOR_AXIOMS + CONNECTION_AXIOMS}

    def record(name, value):
        worst[name] = max(worst[name], float(value))

    for _ in range(sample_count):
        p = rng.uniform(-box, box, n)
        u = rng.uniform(-box, box, n)
        v = rng.uniform(-box, box, n)
        y = shape.split(p)[1]

        g = structure.metric(y)
        phi_m = structure.phi_matrix(y)
        eta_m = structure.eta_covectors(y)
        gamma = structure.christoffel(y)

        def g_norm(w):
            return np.sqrt(max(w @ g @ w, 0.0))

        # cấu trúc framed
        record("phi_squared", g_norm(phi_m @ phi_m @ v + v - (eta_m @ v) @ xi_vectors))
        record("eta_xi_duality", np.max(np.abs(eta_m @ xi_vectors.T - identity_s)))
        record("phi_xi", max(g_norm(phi_m @ w) for w in xi_vectors))
        record("eta_phi", np.max(np.abs(eta_m @ phi_m @ v)))
        # tương thích metric
        record("compatibility",
               abs((phi_m @ u) @ g @ (phi_m @ v) - u @ g @ v + (eta_m @ u) @ (eta_m @ v)))
        # eta đối ngẫu với xi
        record("eta_is_metric_dual", np.max(np.abs(eta_m @ v - xi_vectors @ g @ v)))
        record("xi_sum_norm", abs(xi_sum @ g @ xi_sum - s))
        record("metric_symmetric", np.max(np.abs(g - g.T)))
        record("metric_positive", max(0.0, -np.linalg.eigvalsh(g).min()))

        # (nabla_u phi) v = nabla_u (phi v) - phi(nabla_u v)
        nabla_u_v = np.einsum("kij,i,j->k", gamma, u, v)
        nabla_u_phi_v = (structure.phi_derivative(u, v)
                         + np.einsum("kij,i,j->k", gamma, u, phi_m @ v))
        lhs = nabla_u_phi_v - phi_m @ nabla_u_v
        phi_u, phi_v = phi_m @ u, phi_m @ v
        rhs = np.zeros(n)
        for a in range(s):
            rhs += (phi_u @ g @ phi_v) * xi_vectors[a] + (eta_m[a] @ v) * (phi_m @ phi_u)
        record("nabla_phi", g_norm(lhs - rhs))

        # xi_a có tọa độ hằng nên nabla_v xi_a = Gamma(v, xi_a)
        for a in range(s):
            record("nabla_xi", g_norm(np.einsum("kij,i,j->k", gamma, v, xi_vectors[a]) + phi_m @ v))
        record("christoffel_symmetric", np.max(np.abs(gamma - gamma.transpose(0, 2, 1))))

    report = AxiomReport(shape, sample_count, seed, tol, connection_tol, worst)
    if report.passed:
        logger.info("Axiom suite passed for m=%d, s=%d (%d samples)", shape.m, shape.s, sample_count)
    else:
        logger.warning("Axiom suite failed for m=%d, s=%d: %s", shape.m, shape.s, report.failures)
    return report
