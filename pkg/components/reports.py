"""
FrameCurve - Report Components
Lắp ráp các tài liệu JSON cho từng lệnh CLI.
"""

from datetime import datetime, timezone
from typing import Dict, Optional

import numpy as np

from core.ambient import AxiomReport
from core.classify import ClassificationReport, CurveAnalysis, proper_mean_curvature
from core.frenet import ArcLengthReport, FrenetApparatus
from core.synth import HelixSpec, SampledCurve

TOOL_NAME = "framecurve"


def envelope(command: str, config: dict, result: dict) -> dict:
    """Khung chung của mọi báo cáo; generated_at là trường duy nhất thay đổi giữa các lần chạy."""
    return {
        "tool": TOOL_NAME,
        "command": command,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "result": result,
    }


def _summary(values: np.ndarray, mask: Optional[np.ndarray] = None) -> dict:
    values = np.asarray(values, dtype=float)
    if mask is not None:
        values = values[mask]
    values = values[np.isfinite(values)]
    if values.size == 0:
        return {"min": None, "max": None, "mean": None}
    return {"min": float(values.min()), "max": float(values.max()), "mean": float(values.mean())}


def curve_header(label: str, shape, grid: np.ndarray, exact: bool, spacing_ok: Optional[bool] = None) -> dict:
    header = {
        "label": label,
        "m": shape.m,
        "s": shape.s,
        "t_min": float(grid[0]),
        "t_max": float(grid[-1]),
        "points": int(grid.shape[0]),
        "mode": "exact" if exact else "sampled",
    }
    if spacing_ok is not None:
        header["grid_step"] = float(grid[1] - grid[0])
        header["spacing_ok"] = spacing_ok
    return header


def axioms_result(report: AxiomReport) -> dict:
    return report.to_dict()


def frenet_result(fa: FrenetApparatus) -> dict:
    mask = fa.interior()
    curvatures = {f"kappa{i}": _summary(fa.kappa(i)) for i in range(1, fa.r)}
    return {
        "r": fa.r,
        "curvatures": curvatures,
        "curvature_derivatives": {
            "kappa1_prime": _summary(fa.kappa1_prime, mask),
            "kappa1_second": _summary(fa.kappa1_second, mask),
            "kappa2_prime": _summary(fa.kappa2_prime, mask),
        },
        "orthonormality_residual": fa.orthonormality_residual(),
        "samples_off_order": int(np.count_nonzero((fa.orders > 0) & (fa.orders != fa.r))),
    }


def analysis_result(analysis: CurveAnalysis) -> dict:
    """Báo cáo analyze: tốc độ, góc tiếp xúc, độ cong, bậc r và hai cách tính toán tử."""
    fa = analysis.fa
    proper = proper_mean_curvature(analysis)
    return {
        "curve": curve_header(analysis.samples.label, analysis.shape, fa.grid, analysis.samples.exact,
                              analysis.samples.spacing_ok),
        "speed": fa.arc_length.to_dict(),
        "contact": analysis.contact.to_dict(),
        "frenet": frenet_result(fa),
        "frenet_recursion_residual": analysis.recursion_residual(),
        "route_agreement": analysis.agreement(),
        "proper_mean_curvature": {name: item.to_dict() for name, item in proper.items()},
        "status": "inconsistent" if analysis.contact.bound_violation else "ok",
    }


def not_unit_speed_result(label: str, shape, arc: ArcLengthReport, contact: Optional[dict], grid: np.ndarray,
                          exact: bool) -> dict:
    """Chẩn đoán khi đường cong không có tốc độ đơn vị."""
    return {
        "curve": curve_header(label, shape, grid, exact),
        "status": "inconsistent: not unit speed",
        "speed": arc.to_dict(),
        "contact": contact,
    }


def classification_result(report: ClassificationReport, analysis: CurveAnalysis) -> dict:
    out = report.to_dict()
    out["curve"] = curve_header(analysis.samples.label, analysis.shape, analysis.fa.grid,
                                analysis.samples.exact, analysis.samples.spacing_ok)
    out["r"] = analysis.fa.r
    return out


def synth_certificate(spec: HelixSpec, curve: SampledCurve, report: ClassificationReport) -> Dict:
    """Chứng nhận synth: tham số, độ trôi khung và kết quả phân loại khứ hồi."""
    lam = report.lambda_samples()
    checklist_ok = report.checklist.passed if report.checklist else False
    return {
        "spec": spec.to_dict(),
        "integration": {
            "step_used": curve.provenance.get("step_used"),
            "halvings": curve.provenance.get("halvings"),
            "frame_drift_per_unit_length": curve.provenance.get("drift"),
            "points": int(curve.grid.shape[0]),
        },
        "expected": {"kappa1": spec.curvatures[0], "kappa2": spec.curvatures[1], "lambda": spec.lam},
        "recovered": {
            "lambda_mean": float(np.mean(lam)) if lam.size else None,
            "lambda_error": float(np.max(np.abs(lam - spec.lam))) if lam.size else None,
        },
        "classification": report.to_dict(),
        "passed": bool(report.granted and checklist_ok),
    }
