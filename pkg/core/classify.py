"""
FrameCurve - Classification Module
Góc tiếp xúc, phân loại C-parallel / C-proper (khôi phục lambda) và kiểm tra
số các điều kiện của bốn định lý.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import NO_CLASS, WHICH_OPTIONS, Tolerances
from core.ambient import ManifoldShape, get_structure
from core.frenet import (
    CovariantSamples,
    CurveLike,
    FrenetApparatus,
    OperatorField,
    covariant_samples,
    frenet_apparatus,
    frenet_recursion_residual,
    mean_curvature_ops_direct,
    mean_curvature_ops_formula,
    operator_agreement,
)

logger = logging.getLogger(__name__)


def _max(values: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    values = np.asarray(values, dtype=float)
    if mask is not None:
        values = values[mask]
    values = values[~np.isnan(values)]
    return float(np.max(values)) if values.size else float("nan")


def _spread(values: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
    values = np.asarray(values, dtype=float)
    if mask is not None:
        values = values[mask]
    values = values[np.isfinite(values)]
    return float(np.max(values) - np.min(values)) if values.size else float("nan")


# ----------------------------------------------------------------------
# Contact angle

@dataclass
class ContactReport:
    """cos(theta_alpha)(t) = eta^alpha(T) and the slant / Legendre verdicts."""

    s: int
    grid: np.ndarray
    cos_theta: np.ndarray
    mean: float
    max_deviation: float
    is_slant: bool
    is_legendre: bool
    max_abs: float
    bound_violation: bool

    @property
    def theta(self) -> Optional[float]:
        if not self.is_slant:
            return None
        return float(math.acos(max(-1.0, min(1.0, self.mean))))

    @property
    def bound(self) -> float:
        return 1.0 / math.sqrt(self.s)

    def per_alpha_mean(self) -> List[float]:
        return [float(v) for v in np.nanmean(self.cos_theta, axis=0)]

    def to_dict(self) -> dict:
        return {
            "cos_theta_mean": self.mean,
            "cos_theta_per_alpha": self.per_alpha_mean(),
            "theta": self.theta,
            "max_deviation": self.max_deviation,
            "is_slant": self.is_slant,
            "is_legendre": self.is_legendre,
            "max_abs_cos_theta": self.max_abs,
            "bound": self.bound,
            "bound_violation": self.bound_violation,
        }


def _eta_values(samples: CovariantSamples, vectors: np.ndarray) -> np.ndarray:
    """eta^alpha(v_j) at every sample, shape (n, s)."""
    structure = get_structure(samples.shape)
    y_index = samples.shape.y_index
    return np.stack([structure.eta_covectors(p[y_index]) @ v
                     for p, v in zip(samples.points, vectors)])


def contact_report(
    shape: ManifoldShape,
    c: CurveLike,
    grid: Optional[Sequence[float]] = None,
    slant_tol: Optional[float] = None,
    tols: Optional[Tolerances] = None,
    samples: Optional[CovariantSamples] = None,
) -> ContactReport:
    """
    Phân tích góc tiếp xúc

    The curve is slant iff every eta^alpha(T) is constant and all alpha agree
    (max - min over samples and alpha < slant_tol); Legendre iff additionally
    |cos(theta)| < slant_tol. |cos(theta)| beyond 1/sqrt(s) is reported as a
    structure / curve mismatch.
    """
    tols = tols or Tolerances()
    slant_tol = tols.slant_tol if slant_tol is None else slant_tol
    samples = samples or covariant_samples(shape, c, grid, tols)
    cos_theta = _eta_values(samples, samples.tangents)
    finite = np.all(np.isfinite(cos_theta), axis=1)
    values = cos_theta[finite]
    deviation = float(values.max() - values.min())
    mean = float(values.mean())
    max_abs = float(np.max(np.abs(values)))
    is_slant = deviation < slant_tol
    report = ContactReport(
        s=shape.s,
        grid=samples.grid,
        cos_theta=cos_theta,
        mean=mean,
        max_deviation=deviation,
        is_slant=is_slant,
        is_legendre=is_slant and abs(mean) < slant_tol,
        max_abs=max_abs,
        bound_violation=max_abs > 1.0 / math.sqrt(shape.s) + tols.bound_slack,
    )
    if report.bound_violation:
        logger.warning("|cos(theta)| = %.9g exceeds 1/sqrt(s) = %.9g: curve and structure disagree",
                       max_abs, report.bound)
    return report


# ----------------------------------------------------------------------
# Analysis bundle

@dataclass
class CurveAnalysis:
    """Apparatus, both operator routes and contact data from one sampling pass."""

    fa: FrenetApparatus
    formula: Dict[str, OperatorField]
    direct: Dict[str, OperatorField]
    contact: ContactReport

    @property
    def samples(self) -> CovariantSamples:
        return self.fa.samples

    @property
    def shape(self) -> ManifoldShape:
        return self.fa.shape

    def interior(self) -> np.ndarray:
        return self.fa.interior()

    def agreement(self) -> Dict[str, float]:
        return operator_agreement(self.formula, self.direct, self.samples, self.interior())

    def recursion_residual(self) -> float:
        return frenet_recursion_residual(self.fa)


def analyse_curve(
    shape: ManifoldShape,
    c: CurveLike,
    grid: Optional[Sequence[float]] = None,
    tols: Optional[Tolerances] = None,
) -> CurveAnalysis:
    tols = tols or Tolerances()
    samples = covariant_samples(shape, c, grid, tols)
    fa = frenet_apparatus(shape, c, tols=tols, samples=samples)
    formula = mean_curvature_ops_formula(fa)
    direct = mean_curvature_ops_direct(shape, c, tols=tols, samples=samples)
    contact = contact_report(shape, c, tols=tols, samples=samples)
    return CurveAnalysis(fa, formula, direct, contact)


# ----------------------------------------------------------------------
# Lambda recovery

def project_on_xi_sum(samples: CovariantSamples, vectors: np.ndarray):
    """
    Chiếu lên xi_sum: lambda = g(W, xi_sum) / s và sai lệch |W - lambda xi_sum|_g từng mẫu

    |xi_sum|^2 = s, so the projection recovers an exact multiple exactly.
    """
    structure = get_structure(samples.shape)
    xi_sum = np.broadcast_to(structure.xi_sum(), vectors.shape)
    lam = samples.inner(vectors, xi_sum) / samples.shape.s
    defect = samples.norm(np.nan_to_num(vectors - lam[:, None] * xi_sum))
    defect[~np.isfinite(lam)] = np.nan
    return lam, defect


# ----------------------------------------------------------------------
# Checklists

@dataclass
class CheckItem:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        out = {"residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Checklist:
    theorem: int
    items: List[CheckItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.items) and all(item.passed for item in self.items)

    @property
    def failures(self) -> List[str]:
        return [item.name for item in self.items if not item.passed]

    def __getitem__(self, name: str) -> CheckItem:
        for item in self.items:
            if item.name == name:
                return item
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(item.name == name for item in self.items)

    def residuals(self) -> Dict[str, float]:
        return {item.name: item.residual for item in self.items}

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "items": {item.name: item.to_dict() for item in self.items},
        }


class _Checker:
    """Shared sample data for the four theorem checklists."""

    def __init__(self, fa: FrenetApparatus, contact: ContactReport, shape: ManifoldShape,
                 tols: Optional[Tolerances], operators: Optional[Dict[str, OperatorField]]):
        self.fa = fa
        self.contact = contact
        self.shape = shape
        self.tols = tols or fa.tols
        self.samples = fa.samples
        self.mask = fa.interior()
        self.operators = operators or mean_curvature_ops_formula(fa)
        self.s = shape.s
        self.root_s = math.sqrt(shape.s)
        self.c = contact.mean
        self.rest = math.sqrt(max(0.0, 1.0 - self.s * self.c * self.c))
        structure = get_structure(shape)
        self.xi_sum = np.broadcast_to(structure.xi_sum(), fa.tangents.shape)
        y_index = shape.y_index
        self.phi_t = np.stack([structure.phi_matrix(p[y_index]) @ t
                               for p, t in zip(self.samples.points, np.nan_to_num(fa.tangents))])
        self.k1, self.k2, self.k3 = fa.kappa(1), fa.kappa(2), fa.kappa(3)
        self.k1p, self.k1pp, self.k2p = fa.kappa1_prime, fa.kappa1_second, fa.kappa2_prime
        self.items: List[CheckItem] = []

    # items -----------------------------------------------------------

    def add(self, name: str, residual: float, tolerance: float, passed: Optional[bool] = None, note: str = ""):
        residual = float(residual)
        if passed is None:
            passed = math.isfinite(residual) and residual < tolerance
        self.items.append(CheckItem(name, residual, tolerance, bool(passed), note))

    def scalar(self, name: str, lhs, rhs, note: str = ""):
        """Relative residual |lhs - rhs| / max(1, |rhs|)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            lhs = np.broadcast_to(np.asarray(lhs, dtype=float), self.mask.shape)
            rhs = np.broadcast_to(np.asarray(rhs, dtype=float), self.mask.shape)
            rel = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))
        rel = np.where(np.isfinite(lhs) & np.isfinite(rhs), rel, np.inf)
        self.add(name, _max(rel, self.mask), self.tols.checklist_tol, note=note)

    def vector(self, name: str, lhs: np.ndarray, rhs: np.ndarray, note: str = ""):
        with np.errstate(invalid="ignore"):
            diff = lhs - rhs
        norms = self.samples.norm(np.nan_to_num(diff))
        norms[~np.all(np.isfinite(diff), axis=1)] = np.inf
        self.add(name, _max(norms, self.mask), self.tols.checklist_tol, note=note)

    def span(self, name: str, v: np.ndarray, indices: Sequence[int]):
        """Normalized residual of projecting v onto sp{E_i}."""
        basis = [self.fa.E(i) for i in indices]
        projected = sum(self.samples.inner(v, e)[:, None] * e for e in basis)
        size = self.samples.norm(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = self.samples.norm(v - projected) / np.where(size > 0, size, 1.0)
        label = ", ".join("T" if i == 1 else f"E{i}" for i in indices)
        self.add(name, _max(rel, self.mask), self.tols.span_tol, note=f"span {{{label}}}")

    def constant(self, name: str, values: np.ndarray):
        self.add(name, _spread(values, self.mask), self.tols.const_tol, note="max - min")

    def not_constant(self, name: str, values: np.ndarray):
        spread = _spread(values, self.mask)
        limit = 100.0 * self.tols.const_tol
        self.add(name, spread, limit, passed=math.isfinite(spread) and spread > limit,
                 note="max - min must exceed the limit")

    def nonzero(self, name: str, values: np.ndarray):
        smallest = float(np.nanmin(np.abs(values[self.mask]))) if np.any(self.mask) else float("nan")
        self.add(name, smallest, self.tols.lambda_tol,
                 passed=math.isfinite(smallest) and smallest > self.tols.lambda_tol,
                 note="min |value| must exceed the limit")

    # hypotheses ------------------------------------------------------

    def slant(self):
        self.add("slant", self.contact.max_deviation, self.tols.slant_tol, passed=self.contact.is_slant,
                 note="eta^alpha(T) constant and equal for all alpha")

    def legendre(self):
        self.add("legendre", abs(self.contact.mean), self.tols.slant_tol, passed=self.contact.is_legendre)

    def non_legendre(self):
        self.add("non_legendre", abs(self.contact.mean), self.tols.slant_tol,
                 passed=self.contact.is_slant and not self.contact.is_legendre,
                 note="|cos(theta)| must exceed the limit")

    # shared quantities -----------------------------------------------

    @property
    def kappa3_vanishes(self) -> bool:
        return self.fa.r <= 3

    def lam(self, operator: str) -> np.ndarray:
        lam, _ = project_on_xi_sum(self.samples, self.operators[operator].vectors)
        return lam

    def eta_of(self, i: int) -> np.ndarray:
        return _eta_values(self.samples, np.nan_to_num(self.fa.E(i)))

    def finish(self, theorem: int) -> Checklist:
        checklist = Checklist(theorem, self.items)
        logger.info("Theorem %d checklist: %s", theorem,
                    "passed" if checklist.passed else f"failed ({', '.join(checklist.failures)})")
        return checklist


def theorem1_checklist(
    fa: FrenetApparatus,
    contact: ContactReport,
    shape: ManifoldShape,
    tols: Optional[Tolerances] = None,
    operators: Optional[Dict[str, OperatorField]] = None,
) -> Checklist:
    """C-parallel in the tangent bundle: non-Legendre slant helix identities."""
    ck = _Checker(fa, contact, shape, tols, operators)
    s, rs, c, rest = ck.s, ck.root_s, ck.c, ck.rest
    ck.slant()
    ck.non_legendre()
    ck.constant("kappa1_constant", ck.k1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ck.scalar("kappa2_ratio", ck.k2, -ck.k1 * rest / (rs * c), note="kappa2 = -kappa1 sqrt(1 - s cos^2) / (sqrt(s) cos)")
        lam = ck.lam("nabla_H")
        ck.scalar("lambda", lam, -ck.k1 ** 2 / (s * c), note="lambda = -kappa1^2 / (s cos)")
        ck.add("lambda_constant", _spread(lam, ck.mask), ck.tols.checklist_tol, note="max - min")
        ck.span("xi_sum_in_span", ck.xi_sum, (1, 3))
        ck.vector("xi_sum_expansion", ck.xi_sum, s * c * ck.fa.E(1) + rs * rest * ck.fa.E(3))
        ck.span("phi_t_in_span", ck.phi_t, (2, 4))
        ck.vector("phi_t_expansion", ck.phi_t,
                  (-ck.k1 / (s * c))[:, None] * ck.fa.E(2) - (ck.k3 * rest / rs)[:, None] * ck.fa.E(4))
    if ck.kappa3_vanishes:
        ck.scalar("kappa1_from_angle", ck.k1, -s * c * rest, note="kappa3 = 0")
        ck.scalar("kappa2_from_angle", ck.k2, rs * rest * rest, note="kappa3 = 0")
    return ck.finish(1)


def theorem2_checklist(
    fa: FrenetApparatus,
    contact: ContactReport,
    shape: ManifoldShape,
    tols: Optional[Tolerances] = None,
    operators: Optional[Dict[str, OperatorField]] = None,
) -> Checklist:
    """C-parallel in the normal bundle: Legendre helix identities."""
    ck = _Checker(fa, contact, shape, tols, operators)
    rs = ck.root_s
    ck.legendre()
    ck.constant("kappa1_constant", ck.k1)
    ck.constant("kappa2_constant", ck.k2)
    ck.constant("kappa3_constant", ck.k3)
    ck.vector("xi_sum_sqrt_s_e3", ck.xi_sum, rs * ck.fa.E(3))
    ck.vector("phi_t_expansion", ck.phi_t, (ck.k2 / rs)[:, None] * ck.fa.E(2) - (ck.k3 / rs)[:, None] * ck.fa.E(4))
    ck.scalar("lambda", ck.lam("nabla_perp_H"), ck.k1 * ck.k2 / rs, note="lambda = kappa1 kappa2 / sqrt(s)")
    if ck.kappa3_vanishes:
        ck.scalar("kappa2_sqrt_s", ck.k2, rs, note="kappa3 = 0")
        ck.vector("phi_t_is_e2", ck.phi_t, ck.fa.E(2), note="kappa3 = 0")
    return ck.finish(2)


def _proper_common(ck: _Checker, operator: str):
    ck.not_constant("kappa1_not_constant", ck.k1)
    ck.nonzero("kappa2_nonzero", ck.k2)
    lam = ck.lam(operator)
    with np.errstate(invalid="ignore"):
        e3_rhs = -(2.0 * ck.k1p * ck.k2 + ck.k1 * ck.k2p)
        e4_rhs = -ck.k1 * ck.k2 * ck.k3
    eta3, eta4 = ck.eta_of(3), ck.eta_of(4)
    worst_e3 = max(_scalar_rel(lam * ck.s * eta3[:, a], e3_rhs, ck.mask) for a in range(ck.s))
    worst_e4 = max(_scalar_rel(lam * ck.s * eta4[:, a], e4_rhs, ck.mask) for a in range(ck.s))
    return lam, eta3, eta4, worst_e3, worst_e4


def _scalar_rel(lhs: np.ndarray, rhs: np.ndarray, mask: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    rel = np.where(np.isfinite(lhs) & np.isfinite(rhs), rel, np.inf)
    return _max(rel, mask)


def theorem3_checklist(
    fa: FrenetApparatus,
    contact: ContactReport,
    shape: ManifoldShape,
    tols: Optional[Tolerances] = None,
    operators: Optional[Dict[str, OperatorField]] = None,
) -> Checklist:
    """C-proper in the tangent bundle: non-Legendre slant curve identities."""
    ck = _Checker(fa, contact, shape, tols, operators)
    s, rs, c, rest = ck.s, ck.root_s, ck.c, ck.rest
    ck.slant()
    ck.non_legendre()
    lam, eta3, eta4, worst_e3, worst_e4 = _proper_common(ck, "delta_H")
    with np.errstate(divide="ignore", invalid="ignore"):
        ck.scalar("lambda", lam, 3.0 * ck.k1 * ck.k1p / (s * c), note="lambda = 3 kappa1 kappa1' / (s cos)")
        ck.scalar("kappa_sum_sq", ck.k1 ** 2 + ck.k2 ** 2, ck.k1pp / ck.k1)
    ck.add("eta_e3", worst_e3, ck.tols.checklist_tol, note="lambda s eta(E3) = -(2 kappa1' kappa2 + kappa1 kappa2')")
    ck.add("eta_e4", worst_e4, ck.tols.checklist_tol, note="lambda s eta(E4) = -kappa1 kappa2 kappa3")
    worst_norm = max(_scalar_rel(eta3[:, a] ** 2 + eta4[:, a] ** 2, np.full(eta3.shape[0], rest * rest / s), ck.mask)
                  for a in range(s))
    ck.add("eta_norm", worst_norm, ck.tols.checklist_tol, note="eta(E3)^2 + eta(E4)^2 = (1 - s cos^2) / s")
    ck.span("xi_sum_in_span", ck.xi_sum, (1, 3, 4))
    ck.span("phi_t_in_span", ck.phi_t, (2, 3, 4, 5))
    if ck.kappa3_vanishes:
        with np.errstate(divide="ignore", invalid="ignore"):
            ck.vector("phi_t_on_e2", ck.phi_t, rest * ck.fa.E(2), note="kappa3 = 0")
            e3 = (-s * c * ck.fa.E(1) + ck.xi_sum) / (rs * rest)
            ck.vector("e3_expansion", ck.fa.E(3), e3, note="kappa3 = 0")
            ck.scalar("kappa2_from_angle", ck.k2, rs * (1.0 + ck.k1 * c / rest), note="kappa3 = 0")
    return ck.finish(3)


def theorem4_checklist(
    fa: FrenetApparatus,
    contact: ContactReport,
    shape: ManifoldShape,
    tols: Optional[Tolerances] = None,
    operators: Optional[Dict[str, OperatorField]] = None,
) -> Checklist:
    """C-proper in the normal bundle: Legendre curve identities."""
    ck = _Checker(fa, contact, shape, tols, operators)
    s, rs = ck.s, ck.root_s
    ck.slant()
    ck.legendre()
    lam, eta3, eta4, worst_e3, worst_e4 = _proper_common(ck, "delta_perp_H")
    ck.scalar("kappa1_kappa2_sq", ck.k1 * ck.k2 ** 2 - ck.k1pp, 0.0, note="kappa1 kappa2^2 - kappa1'' = 0")
    ck.add("eta_e3", worst_e3, ck.tols.checklist_tol, note="lambda s eta(E3) = -(2 kappa1' kappa2 + kappa1 kappa2')")
    ck.add("eta_e4", worst_e4, ck.tols.checklist_tol, note="lambda s eta(E4) = -kappa1 kappa2 kappa3")
    worst = max(_scalar_rel(eta3[:, a] ** 2 + eta4[:, a] ** 2, np.full(eta3.shape[0], 1.0 / s), ck.mask)
                for a in range(s))
    ck.add("eta_norm", worst, ck.tols.checklist_tol, note="eta(E3)^2 + eta(E4)^2 = 1 / s")
    ck.span("xi_sum_in_span", ck.xi_sum, (3, 4))
    ck.span("phi_t_in_span", ck.phi_t, (2, 3, 4, 5))
    if ck.kappa3_vanishes:
        ck.vector("xi_sum_sqrt_s_e3", ck.xi_sum, rs * ck.fa.E(3), note="kappa3 = 0")
        ck.scalar("kappa2_sqrt_s", ck.k2, rs, note="kappa3 = 0")
        ck.vector("phi_t_is_e2", ck.phi_t, ck.fa.E(2), note="kappa3 = 0")
    return ck.finish(4)


THEOREM_CHECKLISTS = {
    1: theorem1_checklist,
    2: theorem2_checklist,
    3: theorem3_checklist,
    4: theorem4_checklist,
}


# ----------------------------------------------------------------------
# Classification

@dataclass
class ClassificationReport:
    which: str
    label: str
    operator: str
    lam: np.ndarray
    residual: float
    min_abs_lambda: float
    lambda_nonzero: bool
    contact: ContactReport
    route_agreement: Dict[str, float]
    checklist: Optional[Checklist] = None
    grid: Optional[np.ndarray] = None
    mask: Optional[np.ndarray] = None

    @property
    def granted(self) -> bool:
        return self.label != NO_CLASS

    @property
    def verdict(self) -> str:
        if self.contact.bound_violation:
            return "inconsistent"
        return "pass" if self.granted else "fail"

    def lambda_samples(self) -> np.ndarray:
        return self.lam[self.mask] if self.mask is not None else self.lam

    def to_dict(self) -> dict:
        lam = self.lambda_samples()
        grid = self.grid[self.mask] if self.grid is not None and self.mask is not None else self.grid
        return {
            "which": self.which,
            "class": self.label,
            "operator": self.operator,
            "verdict": self.verdict,
            "granted": self.granted,
            "lambda": {
                "t": [float(v) for v in grid] if grid is not None else None,
                "values": [float(v) for v in lam],
                "min": float(np.min(lam)) if lam.size else None,
                "max": float(np.max(lam)) if lam.size else None,
            },
            "lambda_nonzero": self.lambda_nonzero,
            "residuals": {
                "class": self.residual,
                "min_abs_lambda": self.min_abs_lambda,
                "route_agreement": dict(self.route_agreement),
            },
            "contact": self.contact.to_dict(),
            "checklist": self.checklist.to_dict() if self.checklist else None,
        }


def classify(
    shape: ManifoldShape,
    c: CurveLike,
    grid: Optional[Sequence[float]] = None,
    which: str = "parallel-tangent",
    tols: Optional[Tolerances] = None,
    analysis: Optional[CurveAnalysis] = None,
) -> ClassificationReport:
    """
    Phân loại C-parallel / C-proper

    Args:
        shape: manifold shape
        c: curve (CurveDef or SampledCurve)
        grid: analysis grid
        which: one of WHICH_OPTIONS
        tols: numeric thresholds (class_tol, lambda_tol, ...)
        analysis: precomputed CurveAnalysis to reuse

    Returns:
        ClassificationReport; the class is granted iff the interior residual
        is below class_tol and min |lambda| exceeds lambda_tol
    """
    if which not in WHICH_OPTIONS:
        raise ValueError(f"Unknown class {which!r}; choose from {', '.join(WHICH_OPTIONS)}")
    tols = tols or Tolerances()
    option = WHICH_OPTIONS[which]
    analysis = analysis or analyse_curve(shape, c, grid, tols)
    fa = analysis.fa
    mask = analysis.interior()

    field_values = analysis.formula[option["operator"]].vectors
    lam, defect = project_on_xi_sum(analysis.samples, field_values)
    residual = _max(defect, mask)
    min_abs = float(np.min(np.abs(lam[mask]))) if np.any(mask) else float("nan")
    lambda_nonzero = math.isfinite(min_abs) and min_abs > tols.lambda_tol
    granted = math.isfinite(residual) and residual < tols.class_tol and lambda_nonzero

    checklist = THEOREM_CHECKLISTS[option["theorem"]](
        fa, analysis.contact, shape, tols=tols, operators=analysis.formula)
    report = ClassificationReport(
        which=which,
        label=option["label"] if granted else NO_CLASS,
        operator=option["operator"],
        lam=lam,
        residual=residual,
        min_abs_lambda=min_abs,
        lambda_nonzero=lambda_nonzero,
        contact=analysis.contact,
        route_agreement=analysis.agreement(),
        checklist=checklist,
        grid=fa.grid,
        mask=mask,
    )
    logger.info("%s: %s (residual %.3g, min |lambda| %.3g)",
                which, "granted" if granted else "denied", residual, min_abs)
    return report


# ----------------------------------------------------------------------
# Proper mean curvature

@dataclass
class ProperMeanCurvature:
    """Delta H = lambda H (or Delta^perp H = lambda H) along the curve."""

    operator: str
    lam: np.ndarray
    residual: float
    degenerate: bool
    holds: bool

    def to_dict(self) -> dict:
        finite = self.lam[np.isfinite(self.lam)]
        return {
            "operator": self.operator,
            "holds": self.holds,
            "degenerate": self.degenerate,
            "residual": self.residual,
            "lambda_min": float(finite.min()) if finite.size else None,
            "lambda_max": float(finite.max()) if finite.size else None,
        }


def proper_mean_curvature(analysis: CurveAnalysis, tols: Optional[Tolerances] = None) -> Dict[str, ProperMeanCurvature]:
    """Kiểm tra độ cong trung bình riêng (Delta H = lambda H) cho cả hai bó."""
    tols = tols or analysis.fa.tols
    samples = analysis.samples
    mask = analysis.interior()
    mean_curvature = samples.chain[:, 1]
    size_sq = samples.inner(mean_curvature, mean_curvature)
    degenerate = bool(np.all(size_sq[mask] < tols.rank_tol ** 2)) if np.any(mask) else True
    out = {}
    for operator in ("delta_H", "delta_perp_H"):
        vectors = analysis.formula[operator].vectors
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.where(size_sq > 0, samples.inner(vectors, mean_curvature) / size_sq, 0.0)
        defect = samples.norm(np.nan_to_num(vectors - lam[:, None] * mean_curvature))
        residual = _max(np.where(np.isfinite(lam), defect, np.nan), mask)
        holds = math.isfinite(residual) and residual < tols.class_tol
        out[operator] = ProperMeanCurvature(operator, lam, residual, degenerate, holds)
    return out
