"""
FrameCurve - File Utilities
"""

import json
import logging
import math
import os
from typing import Optional

import numpy as np
import pandas as pd

from config import BUNDLED_CURVES, CURVES_DIR
from core.ambient import ManifoldShape
from core.curvelang import CurveDef, parse_curve_text
from core.synth import SampledCurve

logger = logging.getLogger(__name__)


def ensure_parent_dir(path: str) -> str:
    """Đảm bảo thư mục chứa file tồn tại"""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return parent


def bundled_curve_path(name: str) -> str:
    """
    Đường dẫn file đường cong đi kèm

    Args:
        name: key of BUNDLED_CURVES (e.g. "example2")

    Returns:
        Absolute path inside curves/
    """
    if name not in BUNDLED_CURVES:
        raise ValueError(f"Unknown bundled curve {name!r}; choose from {', '.join(BUNDLED_CURVES)}")
    return os.path.join(CURVES_DIR, BUNDLED_CURVES[name])


def resolve_curve_path(path_or_name: str) -> str:
    """Đường dẫn file, hoặc tên đường cong đi kèm khi file không tồn tại."""
    if os.path.exists(path_or_name):
        return path_or_name
    stem = os.path.splitext(os.path.basename(path_or_name))[0]
    if stem in BUNDLED_CURVES:
        return bundled_curve_path(stem)
    raise FileNotFoundError(f"Curve file not found: {path_or_name}")


def load_curve_file(path: str) -> CurveDef:
    """
    Đọc file đường cong (UTF-8, key = value)

    Raises:
        FileNotFoundError: missing file
        CurveSyntaxError: malformed content
    """
    path = resolve_curve_path(path)
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    curve = parse_curve_text(text, source=os.path.basename(path))
    if not curve.label:
        curve.label = os.path.splitext(os.path.basename(path))[0]
    logger.debug("Loaded %s: m=%d, s=%d, t in %s", path, curve.shape.m, curve.shape.s, curve.t_range)
    return curve


def _clean(value):
    """Chuyển numpy / NaN sang kiểu JSON chuẩn (NaN -> null)."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(document: dict) -> str:
    """Chuỗi JSON UTF-8, thứ tự khóa ổn định."""
    return json.dumps(_clean(document), indent=2, ensure_ascii=False, allow_nan=False)


def write_json(document: dict, path: Optional[str]) -> str:
    """Ghi báo cáo JSON; path None hoặc "-" nghĩa là trả về chuỗi để in ra stdout."""
    text = to_json(document)
    if path and path != "-":
        ensure_parent_dir(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.info("Report written to %s", path)
    return text


def write_csv(frame: pd.DataFrame, path: str) -> str:
    ensure_parent_dir(path)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("CSV written to %s (%d rows)", path, len(frame))
    return path


def save_sampled_curve(curve: SampledCurve, path: str) -> str:
    return write_csv(curve.to_frame(), path)


def load_sampled_curve(path: str, shape: ManifoldShape, label: Optional[str] = None) -> SampledCurve:
    """Đọc SampledCurve từ CSV (cột t, c1.., T1..)."""
    frame = pd.read_csv(path, float_precision="round_trip")
    return SampledCurve.from_frame(shape, frame, label=label or os.path.splitext(os.path.basename(path))[0])
