import math

import numpy as np
import pytest

from core.ambient import ManifoldShape, get_structure
from core.curvelang import sample_jets
from core.frenet import (
    GridError,
    JetOrderError,
    NotUnitSpeedError,
    OPERATOR_NAMES,
    arc_length_report,
    central_difference,
    check_spacing,
    covariant_chain,
    covariant_derivative,
    covariant_samples,
    frenet_apparatus,
    frenet_recursion_residual,
    grid_step,
)
from core.synth import SampledCurve

ROOT_HALF = 1.0 / math.sqrt(2.0)
GRID = np.linspace(0.0, 2.0 * math.pi, 512)


def test_central_difference_accuracy_and_nan_ends() -> None:
    grid = np.linspace(0.0, 1.0, 101)
    first = central_difference(np.sin(grid), grid[1] - grid[0])
    second = central_difference(np.sin(grid), grid[1] - grid[0], order=2)
    assert np.all(np.isnan(first[:2])) and np.all(np.isnan(first[-2:]))
    assert np.allclose(first[2:-2], np.cos(grid[2:-2]), atol=1e-9)
    assert np.allclose(second[2:-2], -np.sin(grid[2:-2]), atol=1e-6)
    with pytest.raises(ValueError):
        central_difference(np.sin(grid), 0.01, order=3)


def test_grid_checks() -> None:
    assert grid_step(np.linspace(0.0, 1.0, 11)) == pytest.approx(0.1)
    with pytest.raises(GridError):
        grid_step([0.0, 0.1, 0.2, 0.3])
    with pytest.raises(GridError):
        grid_step([0.0, 0.1, 0.3, 0.4, 0.5, 0.6])
    with pytest.raises(GridError):
        grid_step(np.linspace(1.0, 0.0, 10))


def test_spacing_check_warns_on_coarse_grid(caplog) -> None:
    assert check_spacing(0.05, 1e-4)
    with caplog.at_level("WARNING", logger="core.frenet"):
        assert not check_spacing(0.2, 1e-4, "coarse")
    assert "too coarse" in caplog.text


def test_samples_record_grid_spacing(shape_22, corrected_example1) -> None:
    assert covariant_samples(shape_22, corrected_example1, GRID).spacing_ok
    coarse = covariant_samples(shape_22, corrected_example1, np.linspace(0.0, 2.0 * math.pi, 16))
    assert not coarse.spacing_ok


def test_flat_chain_is_plain_derivatives(shape_11: ManifoldShape) -> None:
    derivs = np.random.default_rng(1).normal(size=(6, 3))
    chain = covariant_chain(get_structure(shape_11), derivs, 4, flat=True)
    assert np.allclose(chain, derivs[1:])


def test_first_covariant_derivative_adds_connection(shape_22: ManifoldShape) -> None:
    structure = get_structure(shape_22)
    derivs = np.random.default_rng(2).normal(size=(3, 6))
    chain = covariant_chain(structure, derivs, 1)
    y = derivs[0, shape_22.y_index]
    expected = derivs[2] + structure.connection(y, derivs[1], derivs[1])
    assert np.allclose(chain[1], expected)


def test_chain_needs_enough_derivatives(shape_11: ManifoldShape) -> None:
    with pytest.raises(JetOrderError):
        covariant_chain(get_structure(shape_11), np.zeros((3, 3)), 2)
    with pytest.raises(JetOrderError):
        covariant_derivative(shape_11, np.zeros(3), np.zeros((2, 3)), 2)


def test_covariant_derivative_returns_tangent(shape_11: ManifoldShape) -> None:
    v_jet = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    result = covariant_derivative(shape_11, np.zeros(3), v_jet, 1)
    structure = get_structure(shape_11)
    assert np.allclose(result.vector(), structure.connection(np.zeros(1), v_jet[0], v_jet[0]))


def test_corrected_example1_apparatus(shape_22, corrected_example1) -> None:
    fa = frenet_apparatus(shape_22, corrected_example1, GRID)
    mask = fa.interior()
    assert fa.r == 3
    assert np.allclose(fa.kappa(1), ROOT_HALF, atol=1e-8)
    assert np.allclose(fa.kappa(2), ROOT_HALF, atol=1e-8)
    assert np.all(fa.kappa(3) == 0.0)
    assert np.allclose(fa.kappa1_prime[mask], 0.0, atol=1e-6)
    assert fa.orthonormality_residual() < 1e-10
    assert frenet_recursion_residual(fa) < 1e-5
    assert fa.arc_length.unit_speed
    assert fa.arc_length.arc_length == pytest.approx(2.0 * math.pi, rel=1e-9)
    # E4 and E5 are unused at r = 3
    assert np.all(fa.E(4) == 0.0) and np.all(fa.E(5) == 0.0)


def test_apparatus_table_columns(shape_22, corrected_example1) -> None:
    fa = frenet_apparatus(shape_22, corrected_example1, np.linspace(0.0, 1.0, 32))
    table = fa.to_frame()
    assert len(table) == 32
    for column in ("t", "c1", "c6", "kappa1", "kappa2", "kappa3", "order", "E1_1", "E3_6"):
        assert column in table.columns
    assert "E4_1" not in table.columns


def test_printed_example1_is_not_unit_speed(shape_22, printed_example1) -> None:
    with pytest.raises(NotUnitSpeedError) as info:
        frenet_apparatus(shape_22, printed_example1, GRID)
    assert info.value.max_deviation > 0.5
    samples = covariant_samples(shape_22, printed_example1, GRID)
    assert not arc_length_report(samples, 1e-6).unit_speed


def test_geodesic_has_order_one(shape_22, geodesic) -> None:
    fa = frenet_apparatus(shape_22, geodesic)
    assert fa.r == 1
    assert np.all(fa.curvatures[fa.interior()] == 0.0)


def test_shape_mismatch_is_rejected(shape_11, geodesic) -> None:
    with pytest.raises(ValueError):
        covariant_samples(shape_11, geodesic)


def test_operator_routes_agree(corrected_analysis) -> None:
    agreement = corrected_analysis.agreement()
    assert set(agreement) == set(OPERATOR_NAMES)
    for name, value in agreement.items():
        assert value < 1e-5, name


def test_sampled_mode_recovers_curvatures(shape_22, corrected_example1) -> None:
    table = sample_jets(corrected_example1, GRID, 1)
    sampled = SampledCurve(shape_22, GRID, table[:, 0], table[:, 1], label="sampled")
    fa = frenet_apparatus(shape_22, sampled)
    mask = fa.interior()
    assert not fa.samples.exact
    assert fa.r == 3
    # four nested difference levels leave NaN rows at both ends
    assert not mask[:8].any() and not mask[-8:].any()
    assert np.allclose(fa.kappa(1)[mask], ROOT_HALF, atol=1e-6)
    assert np.allclose(fa.kappa(2)[mask], ROOT_HALF, atol=1e-6)


def test_sampled_curve_keeps_its_grid(shape_22, corrected_example1) -> None:
    table = sample_jets(corrected_example1, GRID, 1)
    sampled = SampledCurve(shape_22, GRID, table[:, 0], table[:, 1])
    with pytest.raises(GridError):
        covariant_samples(shape_22, sampled, GRID[:100])
