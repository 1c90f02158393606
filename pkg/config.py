"""
FrameCurve - Configuration Constants
"""

import dataclasses
import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()

ENV_PREFIX = "FRAMECURVE_"


def _override(name: str, default):
    """Đọc giá trị ghi đè từ biến môi trường FRAMECURVE_<NAME> (nếu có)."""
    raw = os.getenv(ENV_PREFIX + name.upper())
    if raw is None or raw.strip() == "":
        return default
    label = ENV_PREFIX + name.upper()
    try:
        value = float(raw)
    except ValueError as exc:
        raise ValueError(f"Invalid value for {label}: {raw!r}") from exc
    if isinstance(default, int):
        # số nguyên: không làm tròn ngầm (512.7 bị từ chối)
        if not value.is_integer():
            raise ValueError(f"{label} must be an integer, got {raw!r}")
        return int(value)
    return value


# Numeric thresholds
TOLERANCES = {
    "quad_tol": 1e-10,          # adaptive Simpson absolute tolerance
    "speed_tol": 1e-6,          # unit-speed check
    "rank_tol": 1e-8,           # Gram-Schmidt residual, relative to input norm
    "sampled_rank_tol": 1e-5,   # same, for finite-difference jets
    "frame_tol": 1e-6,          # frame orthonormality
    "slant_tol": 1e-6,          # contact angle constancy
    "bound_slack": 1e-9,        # |cos(theta)| <= 1/sqrt(s) + slack
    "class_tol": 1e-5,          # |W - lambda * xi_sum|
    "lambda_tol": 1e-6,         # min |lambda|
    "const_tol": 1e-6,          # max - min of a "constant" sample
    "span_tol": 1e-5,           # normalized projection residual
    "checklist_tol": 1e-4,      # theorem identity residuals
    "axiom_tol": 1e-9,          # pure tensor axioms
    "connection_tol": 1e-7,     # connection identities
    "drift_tol": 1e-8,          # synthesis frame drift per unit arc length
    "fd_tol": 1e-4,             # h^4 bound for 5-point central differences
    "legendre_angle_tol": 1e-4, # |theta - pi/2| treated as Legendre when synthesising
}

TOLERANCES = {key: _override(key, value) for key, value in TOLERANCES.items()}


@dataclass(frozen=True)
class Tolerances:
    """Bộ ngưỡng số dùng chung cho frenet / classify / synth."""

    quad_tol: float = TOLERANCES["quad_tol"]
    speed_tol: float = TOLERANCES["speed_tol"]
    rank_tol: float = TOLERANCES["rank_tol"]
    sampled_rank_tol: float = TOLERANCES["sampled_rank_tol"]
    frame_tol: float = TOLERANCES["frame_tol"]
    slant_tol: float = TOLERANCES["slant_tol"]
    bound_slack: float = TOLERANCES["bound_slack"]
    class_tol: float = TOLERANCES["class_tol"]
    lambda_tol: float = TOLERANCES["lambda_tol"]
    const_tol: float = TOLERANCES["const_tol"]
    span_tol: float = TOLERANCES["span_tol"]
    checklist_tol: float = TOLERANCES["checklist_tol"]
    axiom_tol: float = TOLERANCES["axiom_tol"]
    connection_tol: float = TOLERANCES["connection_tol"]
    drift_tol: float = TOLERANCES["drift_tol"]
    fd_tol: float = TOLERANCES["fd_tol"]
    legendre_angle_tol: float = TOLERANCES["legendre_angle_tol"]

    def replace(self, **overrides) -> "Tolerances":
        """Tạo bản sao với các ngưỡng được ghi đè (bỏ qua giá trị None)."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        for key, value in changes.items():
            if value <= 0:
                raise ValueError(f"Tolerance {key} must be positive, got {value}")
        return dataclasses.replace(self, **changes)


# Default Values
DEFAULTS = {
    "grid_points": 512,
    "min_analysis_points": 16,
    "fd_min_points": 5,
    "t_range": (0.0, 1.0),
    "seed": 12345,
    "axiom_samples": 200,
    "sample_box": 2.0,
    "jet_order": 5,
    "max_jet_order": 6,
    "quad_max_depth": 40,
    "quad_checkpoints": 4096,
    "synth_t_span": (0.0, 6.283185307179586),
    "synth_samples": 2049,
    "synth_step": 1.0 / 256.0,
    "synth_max_halvings": 8,
    "theorem2_kappa1": 1.0,
}

DEFAULTS = {
    key: (_override(key, value) if not isinstance(value, tuple) else value)
    for key, value in DEFAULTS.items()
}


# Classification targets: {parallel|proper} x {tangent|normal}
WHICH_OPTIONS = {
    "parallel-tangent": {
        "label": "C-parallel-tangent",
        "operator": "nabla_H",
        "theorem": 1,
        "description": "nabla_T H = lambda * sum(xi)",
    },
    "parallel-normal": {
        "label": "C-parallel-normal",
        "operator": "nabla_perp_H",
        "theorem": 2,
        "description": "nabla_T^perp H = lambda * sum(xi)",
    },
    "proper-tangent": {
        "label": "C-proper-tangent",
        "operator": "delta_H",
        "theorem": 3,
        "description": "Delta H = lambda * sum(xi)",
    },
    "proper-normal": {
        "label": "C-proper-normal",
        "operator": "delta_perp_H",
        "theorem": 4,
        "description": "Delta^perp H = lambda * sum(xi)",
    },
}

NO_CLASS = "none"

# Exit Codes
EXIT_CODES = {
    "ok": 0,
    "usage": 1,
    "failure": 2,
}

CURVES_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "curves")

# Bundled curves
BUNDLED_CURVES = {
    "example1": "example1.curve",
    "example1-corrected": "example1-corrected.curve",
    "example2": "example2.curve",
    "geodesic": "geodesic.curve",
}
