import math

import numpy as np
import pytest

from core.ambient import ManifoldShape, get_structure
from core.classify import analyse_curve, classify
from core.synth import HelixSpec, SampledCurve, SynthesisError, initial_frame, integrate
from utils.file_utils import load_sampled_curve, save_sampled_curve

ROOT_HALF = 1.0 / math.sqrt(2.0)


@pytest.mark.parametrize("kwargs, fragment", [
    (dict(theorem=1), "needs a contact angle"),
    (dict(theorem=1, theta=math.pi / 3), "cos\\(theta\\) < 0"),
    (dict(theorem=1, theta=math.pi / 2), "Legendre case"),
    (dict(theorem=1, theta=1.5708), "Legendre case"),
    (dict(theorem=1, theta=math.pi - 0.1), "s cos\\^2"),
    (dict(theorem=2, theta=math.pi / 3), "theta must be pi/2"),
    (dict(theorem=2, kappa1=0.0), "kappa_1 must be positive"),
    (dict(theorem=3, theta=2.0), "Unknown theorem"),
    (dict(theorem=2, t_span=(1.0, 1.0)), "Empty t_span"),
    (dict(theorem=2, samples=4), "samples must be"),
])
def test_helix_spec_validation(shape_22, kwargs, fragment) -> None:
    with pytest.raises(SynthesisError, match=fragment):
        HelixSpec(shape=shape_22, **kwargs)


def test_theorem1_closed_forms(shape_22) -> None:
    spec = HelixSpec(shape_22, 1, theta=2.0 * math.pi / 3.0)
    assert spec.curvatures == pytest.approx((ROOT_HALF, ROOT_HALF))
    assert spec.lam == pytest.approx(0.5)


@pytest.mark.parametrize("s", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("cos_theta", [-0.05, -0.1, -0.2, -0.3, -0.4])
def test_theorem1_identities_are_consistent(s, cos_theta) -> None:
    spec = HelixSpec(ManifoldShape(1, s), 1, theta=math.acos(cos_theta))
    k1, k2 = spec.curvatures
    rest = math.sqrt(1.0 - s * cos_theta ** 2)
    assert k1 > 0 and k2 > 0
    assert k2 == pytest.approx(-k1 * rest / (math.sqrt(s) * cos_theta), rel=1e-12)
    assert spec.lam == pytest.approx(-k1 ** 2 / (s * cos_theta), rel=1e-12)


def test_theorem2_forces_legendre_angle(shape_22) -> None:
    spec = HelixSpec(shape_22, 2, kappa1=1.5)
    assert spec.theta == pytest.approx(math.pi / 2)
    assert spec.curvatures == pytest.approx((1.5, math.sqrt(2.0)))
    assert spec.lam == pytest.approx(1.5)


@pytest.mark.parametrize("theta", [1.5708, math.pi / 2 - 5e-5])
def test_theorem2_snaps_near_legendre_angle(shape_22, theta) -> None:
    spec = HelixSpec(shape_22, 2, theta=theta)
    assert spec.theta == math.pi / 2
    assert spec.cos_theta == 0.0


@pytest.mark.parametrize("theorem, theta", [(1, 2.0 * math.pi / 3.0), (1, 1.9), (2, None)])
def test_initial_frame(shape_22, theorem, theta) -> None:
    spec = HelixSpec(shape_22, theorem, theta=theta)
    origin, e1, e2, e3 = initial_frame(spec)
    structure = get_structure(shape_22)
    y = np.zeros(2)
    frame = np.stack([e1.vector(), e2.vector(), e3.vector()])
    assert np.allclose(frame @ structure.metric(y) @ frame.T, np.eye(3), atol=1e-12)
    assert np.allclose(structure.eta_covectors(y) @ frame[0], spec.cos_theta, atol=1e-12)
    assert origin.vector().tolist() == [0.0] * 6


def test_integrated_theorem1_helix_stays_slant(shape_22) -> None:
    spec = HelixSpec(shape_22, 1, theta=2.0 * math.pi / 3.0, t_span=(0.0, 2.0), samples=257)
    curve = integrate(spec)
    structure = get_structure(shape_22)
    speeds = [structure.norm(p[shape_22.y_index], t) for p, t in zip(curve.points, curve.tangents)]
    cosines = [structure.eta_covectors(p[shape_22.y_index]) @ t for p, t in zip(curve.points, curve.tangents)]
    assert np.allclose(speeds, 1.0, atol=1e-9)
    assert np.allclose(cosines, -0.5, atol=1e-8)
    assert curve.provenance["drift"] < 1e-8
    assert curve.provenance["halvings"] == 0


@pytest.mark.slow
@pytest.mark.parametrize("m, s, cos_theta", [
    (2, 2, -0.5),
    (1, 1, -0.2), (1, 1, -0.4),
    (1, 2, -0.2), (1, 2, -0.4),
    (1, 4, -0.2), (1, 4, -0.4),
])
def test_theorem1_helix_round_trip(m, s, cos_theta) -> None:
    shape = ManifoldShape(m, s)
    spec = HelixSpec(shape, 1, theta=math.acos(cos_theta), t_span=(0.0, 2.0), samples=257)
    curve = integrate(spec)
    analysis = analyse_curve(shape, curve)
    report = classify(shape, curve, which="parallel-tangent", analysis=analysis)
    assert analysis.fa.r == 3
    assert report.granted
    assert np.allclose(report.lambda_samples(), spec.lam, atol=1e-4)
    assert report.checklist.passed, report.checklist.failures


@pytest.mark.slow
@pytest.mark.parametrize("s", [1, 2, 4])
@pytest.mark.parametrize("kappa1", [0.5, 1.0, 2.0])
def test_theorem2_helix_round_trip(s, kappa1) -> None:
    shape = ManifoldShape(1, s)
    spec = HelixSpec(shape, 2, kappa1=kappa1, t_span=(0.0, 2.0), samples=257)
    curve = integrate(spec)
    report = classify(shape, curve, which="parallel-normal")
    assert report.contact.is_legendre
    assert report.granted
    assert np.allclose(report.lambda_samples(), spec.lam, atol=1e-4)
    assert report.checklist.passed, report.checklist.failures


def test_sampled_curve_csv_round_trip(shape_11, tmp_path) -> None:
    spec = HelixSpec(shape_11, 2, t_span=(0.0, 0.5), samples=33)
    curve = integrate(spec)
    path = save_sampled_curve(curve, str(tmp_path / "helix.csv"))
    loaded = load_sampled_curve(path, shape_11)
    assert loaded.label == "helix"
    # %.17g plus round-trip parsing: bit-identical
    assert np.array_equal(loaded.grid, curve.grid)
    assert np.array_equal(loaded.points, curve.points)
    assert np.array_equal(loaded.tangents, curve.tangents)


def test_sampled_curve_rejects_bad_arrays(shape_11) -> None:
    grid = np.linspace(0.0, 1.0, 5)
    with pytest.raises(ValueError):
        SampledCurve(shape_11, grid, np.zeros((5, 2)), np.zeros((5, 3)))
    with pytest.raises(ValueError):
        SampledCurve(shape_11, grid, np.full((5, 3), np.nan), np.zeros((5, 3)))
