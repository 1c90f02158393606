import numpy as np
import pytest

from core.ambient import (
    ManifoldShape,
    Point,
    Tangent,
    christoffel,
    eta,
    get_structure,
    metric,
    phi,
    verify_axioms,
    xi,
)


@pytest.mark.parametrize("m, s", [(0, 1), (1, 0), (-1, 2), (1.5, 1), (True, 1)])
def test_shape_rejects_non_positive_integers(m, s) -> None:
    with pytest.raises(ValueError):
        ManifoldShape(m, s)


def test_shape_layout(shape_22: ManifoldShape) -> None:
    assert shape_22.dim == 6
    x, y, z = shape_22.split(np.arange(6.0))
    assert x.tolist() == [0.0, 1.0]
    assert y.tolist() == [2.0, 3.0]
    assert z.tolist() == [4.0, 5.0]
    assert shape_22.join(x, y, z).tolist() == list(np.arange(6.0))
    with pytest.raises(ValueError):
        shape_22.join([0.0], [1.0], [2.0])


def test_point_rejects_non_finite(shape_11: ManifoldShape) -> None:
    with pytest.raises(ValueError):
        Point.from_vector(shape_11, [0.0, np.nan, 1.0])
    assert Point.origin(shape_11).vector().tolist() == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("m, s", [(1, 1), (2, 2), (1, 4), (3, 2)])
def test_axiom_suite_passes(m: int, s: int) -> None:
    report = verify_axioms(ManifoldShape(m, s), sample_count=40, seed=7)
    assert report.passed, report.failures
    assert report.to_dict()["failures"] == []


def test_axiom_report_is_seeded(shape_22: ManifoldShape) -> None:
    first = verify_axioms(shape_22, sample_count=10, seed=3)
    second = verify_axioms(shape_22, sample_count=10, seed=3)
    assert first.residuals == second.residuals


def test_axiom_suite_rejects_bad_arguments(shape_11: ManifoldShape) -> None:
    with pytest.raises(ValueError):
        verify_axioms(shape_11, sample_count=0)
    with pytest.raises(ValueError):
        verify_axioms(shape_11, tol=0.0)


def test_eta_xi_duality(shape_22: ManifoldShape) -> None:
    p = shape_22.join([0.3, -1.2], [0.7, 2.0], [5.0, -4.0])
    for a in (1, 2):
        for b in (1, 2):
            assert eta(shape_22, a, p, xi(shape_22, b)) == pytest.approx(float(a == b), abs=1e-15)
    assert np.allclose(phi(shape_22, p, xi(shape_22, 1)).vector(), 0.0)


def test_alpha_out_of_range(shape_22: ManifoldShape) -> None:
    with pytest.raises(IndexError):
        xi(shape_22, 0)
    with pytest.raises(IndexError):
        eta(shape_22, 3, np.zeros(6), np.zeros(6))


def test_xi_sum_has_norm_sqrt_s(shape_14: ManifoldShape) -> None:
    structure = get_structure(shape_14)
    p = np.array([1.5, -0.25, 0.0, 1.0, 2.0, 3.0])
    assert metric(shape_14, p, structure.xi_sum(), structure.xi_sum()) == pytest.approx(4.0)


def test_horizontal_frame_is_orthonormal_and_horizontal(shape_22: ManifoldShape) -> None:
    structure = get_structure(shape_22)
    y = np.array([0.4, -1.3])
    frame = structure.horizontal_frame(y)
    gram = frame @ structure.metric(y) @ frame.T
    assert np.allclose(gram, np.eye(4), atol=1e-14)
    assert np.allclose(structure.eta_covectors(y) @ frame.T, 0.0, atol=1e-14)
    # Y_i = -phi(X_i)
    assert np.allclose(structure.phi_matrix(y) @ frame[0], -frame[2])


def test_phi_of_tangent_in_coordinates(shape_11: ManifoldShape) -> None:
    p = Point((0.0,), (2.0,), (0.0,))
    v = Tangent((1.0,), (3.0,), (5.0,))
    # x-out = v_y, y-out = -v_x, z-out = y * v_y
    assert phi(shape_11, p, v).vector().tolist() == [3.0, -1.0, 6.0]


def test_christoffel_is_symmetric(shape_22: ManifoldShape) -> None:
    gamma = christoffel(shape_22, np.array([0.1, 0.2, -0.7, 1.1, 0.0, 3.0]))
    assert np.allclose(gamma, gamma.transpose(0, 2, 1))


def test_metric_series_matches_difference_quotient(shape_22: ManifoldShape) -> None:
    structure = get_structure(shape_22)
    y0, direction, h = np.array([0.5, -0.2]), np.array([1.0, 2.0]), 1e-4
    series = structure.metric_series(np.stack([y0, direction]))
    quotient = (structure.metric(y0 + h * direction) - structure.metric(y0 - h * direction)) / (2 * h)
    assert np.allclose(series[0], structure.metric(y0))
    assert np.allclose(series[1], quotient, atol=1e-9)


def test_christoffel_series_matches_difference_quotient(shape_11: ManifoldShape) -> None:
    structure = get_structure(shape_11)
    y0, direction, h = np.array([0.8]), np.array([1.0]), 1e-5
    series = structure.christoffel_series(np.stack([y0, direction, np.zeros(1)]))
    quotient = (structure.christoffel(y0 + h * direction) - structure.christoffel(y0 - h * direction)) / (2 * h)
    assert np.allclose(series[0], structure.christoffel(y0))
    assert np.allclose(series[1], quotient, atol=1e-7)


def test_structure_factory_caches(shape_22: ManifoldShape) -> None:
    assert get_structure(shape_22) is get_structure(ManifoldShape(2, 2))


@pytest.mark.parametrize("m, s", [(1, 1), (2, 2), (1, 4)])
def test_christoffel_matches_difference_quotient_of_metric(m: int, s: int) -> None:
    shape = ManifoldShape(m, s)
    structure = get_structure(shape)
    y = np.linspace(-0.7, 1.3, m)
    h = 1e-4
    dg = np.zeros((shape.dim,) * 3)
    for k in range(m):
        step = np.zeros(m)
        step[k] = h
        dg[shape.y_index.start + k] = (structure.metric(y + step) - structure.metric(y - step)) / (2 * h)
    assert np.allclose(structure.metric_partials(y), dg, atol=1e-9)

    g_inv = np.linalg.inv(structure.metric(y))
    expected = np.zeros_like(dg)
    for k in range(shape.dim):
        for i in range(shape.dim):
            for j in range(shape.dim):
                expected[k, i, j] = 0.5 * sum(
                    g_inv[k, l] * (dg[i, j, l] + dg[j, i, l] - dg[l, i, j]) for l in range(shape.dim))
    assert np.allclose(structure.christoffel(y), expected, atol=1e-8)
    assert np.allclose(structure.inverse_metric(y) @ structure.metric(y), np.eye(shape.dim), atol=1e-12)
