"""
FrameCurve - Command Line Application
Công cụ khung Frenet và phân loại đường cong slant trong S-đa tạp R^{2m+s}(-3s)
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import DEFAULTS, EXIT_CODES, WHICH_OPTIONS, Tolerances
from components.published_examples import run_example
from components.reports import (
    analysis_result,
    axioms_result,
    classification_result,
    envelope,
    not_unit_speed_result,
    synth_certificate,
)
from core.ambient import ManifoldShape, verify_axioms
from core.classify import analyse_curve, classify, contact_report
from core.curvelang import CurveDomainError, CurveSyntaxError, parse_number
from core.frenet import JetOrderError, NotUnitSpeedError, arc_length_report, covariant_samples
from core.quadrature import QuadratureError
from core.synth import HelixSpec, SynthesisError, integrate
from utils.file_utils import load_curve_file, load_sampled_curve, save_sampled_curve, write_csv, write_json

logger = logging.getLogger("framecurve")


class UsageError(ValueError):
    """Bad command line or input file."""


class VerificationFailure(RuntimeError):
    """Numeric or verification failure (exit code 2); carries the report."""

    def __init__(self, message: str, document: Optional[dict] = None):
        super().__init__(message)
        self.document = document


# ============================================
# RUN CONFIG
# ============================================

@dataclass
class RunConfig:
    command: str
    curve: Optional[str] = None
    m: Optional[int] = None
    s: Optional[int] = None
    grid: Optional[Tuple[float, float, int]] = None
    tols: Tolerances = field(default_factory=Tolerances)
    out: Optional[str] = None
    csv: Optional[str] = None
    seed: int = DEFAULTS["seed"]
    which: str = "parallel-tangent"
    theorem: Optional[int] = None
    theta: Optional[float] = None
    kappa1: float = DEFAULTS["theorem2_kappa1"]
    samples: Optional[int] = None
    example: Optional[int] = None
    axiom_tol: Optional[float] = None

    def __post_init__(self):
        if self.grid is not None and self.grid[2] < DEFAULTS["min_analysis_points"]:
            raise UsageError(f"Grid needs n >= {DEFAULTS['min_analysis_points']} points")

    def grid_array(self) -> Optional[np.ndarray]:
        if self.grid is None:
            return None
        lo, hi, n = self.grid
        return np.linspace(lo, hi, n)

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "curve": self.curve,
            "m": self.m,
            "s": self.s,
            "grid": list(self.grid) if self.grid else None,
            "seed": self.seed,
            "tolerances": dict(vars(self.tols)),
        }
        if self.command == "classify":
            out["which"] = self.which
        if self.command == "synth":
            out.update(theorem=self.theorem, theta=self.theta, kappa1=self.kappa1, samples=self.samples)
        if self.command == "example":
            out["example"] = self.example
        return out


def parse_grid(text: str) -> Tuple[float, float, int]:
    """Đọc lưới 'a:b:n'; a, b có thể là biểu thức hằng như 2*pi."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"Grid must look like a:b:n, got {text!r}")
    try:
        lo, hi = parse_number(parts[0]), parse_number(parts[1])
        n = int(parts[2])
    except (ValueError, ArithmeticError) as exc:
        raise UsageError(f"Invalid grid {text!r}: {exc}") from None
    if not hi > lo:
        raise UsageError(f"Grid must have a < b, got {text!r}")
    return lo, hi, n


# ============================================
# ARGUMENT PARSER
# ============================================

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="CSV output path")
    common.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    common.add_argument("--tol-class", type=float, dest="class_tol", help="classification residual threshold")
    common.add_argument("--tol-slant", type=float, dest="slant_tol", help="contact angle constancy threshold")
    common.add_argument("--quad-tol", type=float, dest="quad_tol", help="adaptive Simpson tolerance")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    shape_args = argparse.ArgumentParser(add_help=False)
    shape_args.add_argument("--m", type=int)
    shape_args.add_argument("--s", type=int)

    grid_args = argparse.ArgumentParser(add_help=False)
    grid_args.add_argument("--grid", type=parse_grid, help="a:b:n (default: file t-range, 512 points)")

    parser = _Parser(prog="framecurve", description="Frenet apparatus and C-parallel / C-proper "
                                                    "classification of slant curves in R^{2m+s}(-3s)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    axioms = sub.add_parser("axioms", parents=[common, shape_args], help="check the structure axioms")
    axioms.add_argument("--samples", type=int, default=DEFAULTS["axiom_samples"])
    axioms.add_argument("--tol", type=float, default=None, help="limit for the pure tensor identities")

    analyze = sub.add_parser("analyze", parents=[common, shape_args, grid_args], help="Frenet apparatus of a curve")
    analyze.add_argument("curve", help="curve file, bundled curve name, or sampled-curve CSV")

    classify_cmd = sub.add_parser("classify", parents=[common, shape_args, grid_args],
                                  help="C-parallel / C-proper classification")
    classify_cmd.add_argument("curve")
    classify_cmd.add_argument("--which", choices=sorted(WHICH_OPTIONS), default="parallel-tangent")

    synth = sub.add_parser("synth", parents=[common, shape_args], help="integrate a theorem 1 / 2 helix")
    synth.add_argument("--theorem", type=int, choices=(1, 2), required=True)
    synth.add_argument("--theta", type=float)
    synth.add_argument("--kappa1", type=float, default=DEFAULTS["theorem2_kappa1"])
    synth.add_argument("--samples", type=int, default=DEFAULTS["synth_samples"])

    example = sub.add_parser("example", parents=[common], help="reproduce a published example")
    example.add_argument("which", type=int, choices=(1, 2))
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    try:
        tols = Tolerances().replace(class_tol=args.class_tol, slant_tol=args.slant_tol, quad_tol=args.quad_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    command = args.command
    return RunConfig(
        command=command,
        curve=getattr(args, "curve", None),
        m=getattr(args, "m", None),
        s=getattr(args, "s", None),
        grid=getattr(args, "grid", None),
        tols=tols,
        out=args.out,
        csv=args.csv,
        seed=args.seed,
        which=getattr(args, "which", "parallel-tangent") if command == "classify" else "parallel-tangent",
        theorem=getattr(args, "theorem", None),
        theta=getattr(args, "theta", None),
        kappa1=getattr(args, "kappa1", DEFAULTS["theorem2_kappa1"]),
        samples=getattr(args, "samples", None),
        example=args.which if command == "example" else None,
        axiom_tol=getattr(args, "tol", None),
    )


def _shape(config: RunConfig, default_m: int = 1) -> ManifoldShape:
    try:
        return ManifoldShape(config.m if config.m is not None else default_m,
                             config.s if config.s is not None else 1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ============================================
# CURVE INPUT
# ============================================

def load_input_curve(config: RunConfig):
    """File đường cong (.curve) hoặc đường cong mẫu (.csv, cần --m --s)."""
    path = config.curve
    if path.lower().endswith(".csv"):
        if config.m is None or config.s is None:
            raise UsageError("A sampled-curve CSV needs --m and --s")
        if config.grid is not None:
            raise UsageError("A sampled curve is analysed on its own grid; drop --grid")
        return load_sampled_curve(path, _shape(config))
    try:
        curve = load_curve_file(path)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from None
    for name in ("m", "s"):
        override = getattr(config, name)
        if override is not None and override != getattr(curve.shape, name):
            raise UsageError(f"--{name} {override} contradicts the curve file ({name} = {getattr(curve.shape, name)})")
    return curve


def _not_unit_speed(config: RunConfig, curve, error: NotUnitSpeedError) -> VerificationFailure:
    samples = covariant_samples(curve.shape, curve, config.grid_array(), config.tols)
    arc = arc_length_report(samples, config.tols.speed_tol)
    contact = contact_report(curve.shape, curve, tols=config.tols, samples=samples)
    result = not_unit_speed_result(curve.label, curve.shape, arc, contact.to_dict(), samples.grid, samples.exact)
    return VerificationFailure(str(error), envelope(config.command, config.to_dict(), result))


# ============================================
# COMMANDS
# ============================================

def cmd_axioms(config: RunConfig) -> Tuple[int, dict]:
    shape = _shape(config)
    samples = config.samples if config.samples is not None else DEFAULTS["axiom_samples"]
    tol = config.axiom_tol if config.axiom_tol is not None else config.tols.axiom_tol
    report = verify_axioms(shape, sample_count=samples, tol=tol, seed=config.seed)
    document = envelope("axioms", config.to_dict(), axioms_result(report))
    return (EXIT_CODES["ok"] if report.passed else EXIT_CODES["failure"]), document


def cmd_analyze(config: RunConfig) -> Tuple[int, dict]:
    curve = load_input_curve(config)
    try:
        analysis = analyse_curve(curve.shape, curve, config.grid_array(), config.tols)
    except NotUnitSpeedError as exc:
        raise _not_unit_speed(config, curve, exc) from exc
    result = analysis_result(analysis)
    if config.csv:
        write_csv(analysis.fa.to_frame(), config.csv)
        result["csv"] = config.csv
    code = EXIT_CODES["failure"] if analysis.contact.bound_violation else EXIT_CODES["ok"]
    return code, envelope("analyze", config.to_dict(), result)


def cmd_classify(config: RunConfig) -> Tuple[int, dict]:
    curve = load_input_curve(config)
    try:
        analysis = analyse_curve(curve.shape, curve, config.grid_array(), config.tols)
    except NotUnitSpeedError as exc:
        raise _not_unit_speed(config, curve, exc) from exc
    report = classify(curve.shape, curve, which=config.which, tols=config.tols, analysis=analysis)
    result = classification_result(report, analysis)
    if config.csv:
        write_csv(analysis.fa.to_frame(), config.csv)
        result["csv"] = config.csv
    code = EXIT_CODES["failure"] if report.verdict == "inconsistent" else EXIT_CODES["ok"]
    return code, envelope("classify", config.to_dict(), result)


def cmd_synth(config: RunConfig) -> Tuple[int, dict]:
    shape = _shape(config)
    spec_args = dict(shape=shape, theorem=config.theorem, theta=config.theta, kappa1=config.kappa1)
    if config.samples is not None:
        spec_args["samples"] = config.samples
    try:
        spec = HelixSpec(**spec_args)
    except SynthesisError as exc:
        raise UsageError(str(exc)) from None

    curve = integrate(spec, config.tols)
    if config.csv:
        save_sampled_curve(curve, config.csv)
    which = "parallel-tangent" if spec.theorem == 1 else "parallel-normal"
    analysis = analyse_curve(shape, curve, tols=config.tols)
    report = classify(shape, curve, which=which, tols=config.tols, analysis=analysis)
    certificate = synth_certificate(spec, curve, report)
    if config.csv:
        certificate["csv"] = config.csv
    document = envelope("synth", config.to_dict(), certificate)
    return (EXIT_CODES["ok"] if certificate["passed"] else EXIT_CODES["failure"]), document


def cmd_example(config: RunConfig) -> Tuple[int, dict]:
    result = run_example(config.example, config.tols)
    if config.csv:
        write_csv(result.table(), config.csv)
    document = envelope("example", config.to_dict(), result.to_dict())
    return (EXIT_CODES["ok"] if result.passed else EXIT_CODES["failure"]), document


COMMANDS = {
    "axioms": cmd_axioms,
    "analyze": cmd_analyze,
    "classify": cmd_classify,
    "synth": cmd_synth,
    "example": cmd_example,
}


# ============================================
# MAIN APP
# ============================================

def setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _emit(document: dict, out: Optional[str]) -> None:
    text = write_json(document, out)
    if not out or out == "-":
        sys.stdout.write(text + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    """Điểm vào CLI; trả về exit code (0 ok, 1 usage, 2 numeric / verification failure)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"framecurve: error: {exc}\n")
        return EXIT_CODES["usage"]

    setup_logging(args.verbose)
    out = getattr(args, "out", None)
    try:
        config = config_from_args(args)
        code, document = COMMANDS[config.command](config)
    except VerificationFailure as exc:
        logger.error("%s", exc)
        if exc.document is not None:
            _emit(exc.document, out)
        return EXIT_CODES["failure"]
    except (QuadratureError, CurveDomainError, SynthesisError, NotUnitSpeedError, JetOrderError, ArithmeticError) as exc:
        logger.error("Numeric failure: %s", exc)
        return EXIT_CODES["failure"]
    except (UsageError, CurveSyntaxError, FileNotFoundError, ValueError) as exc:
        logger.error("%s", exc)
        sys.stderr.write(f"framecurve: error: {exc}\n")
        return EXIT_CODES["usage"]

    _emit(document, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
