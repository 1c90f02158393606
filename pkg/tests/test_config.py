import pytest

import config
from config import TOLERANCES, WHICH_OPTIONS, Tolerances


def test_tolerances_mirror_constants() -> None:
    tols = Tolerances()
    for name, value in TOLERANCES.items():
        assert getattr(tols, name) == value


def test_replace_ignores_none_and_rejects_non_positive() -> None:
    tols = Tolerances().replace(class_tol=1e-3, slant_tol=None)
    assert tols.class_tol == 1e-3
    assert tols.slant_tol == TOLERANCES["slant_tol"]
    with pytest.raises(ValueError):
        Tolerances().replace(quad_tol=0.0)


def test_environment_override(monkeypatch) -> None:
    monkeypatch.setenv("FRAMECURVE_CLASS_TOL", "1e-6")
    monkeypatch.setenv("FRAMECURVE_GRID_POINTS", "")
    assert config._override("class_tol", 1e-5) == 1e-6
    assert config._override("grid_points", 512) == 512
    monkeypatch.setenv("FRAMECURVE_SEED", "abc")
    with pytest.raises(ValueError, match="FRAMECURVE_SEED"):
        config._override("seed", 1)


@pytest.mark.parametrize("raw", ["512.7", "1e-3", "inf"])
def test_integer_override_is_not_truncated(monkeypatch, raw) -> None:
    monkeypatch.setenv("FRAMECURVE_GRID_POINTS", raw)
    with pytest.raises(ValueError, match="must be an integer"):
        config._override("grid_points", 512)


def test_integer_override_accepts_whole_numbers(monkeypatch) -> None:
    monkeypatch.setenv("FRAMECURVE_GRID_POINTS", "1e3")
    assert config._override("grid_points", 512) == 1000


def test_which_options_cover_both_classes() -> None:
    assert sorted(WHICH_OPTIONS) == ["parallel-normal", "parallel-tangent", "proper-normal", "proper-tangent"]
