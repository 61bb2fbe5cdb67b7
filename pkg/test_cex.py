import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cex import (
    AnalyticPath, default_t_grid, eta, in_beak, in_support, log_phi, phi, probe_analytic_paths,
    probe_beak, psi, random_paths,
)


def test_building_blocks():
    assert psi(0.0) == 0.0
    assert psi(-1.0) == 0.0
    assert psi(1.0) == pytest.approx(math.exp(-1.0))
    assert eta(0.0) == 1.0
    assert eta(0.5) == 0.0
    assert eta(-0.7) == 0.0


def test_phi_on_the_spine():
    x = 0.5
    assert phi(x, psi(x)) == pytest.approx(math.exp(-4.0))
    assert phi(x, 2.5 * psi(x)) == 0.0
    assert phi(0.0, 0.0) == 0.0
    assert phi(-0.1, 0.1) == 0.0


def test_support_survives_underflow():
    x = 0.01
    y = psi(x)
    assert y > 0.0
    assert phi(x, y) == 0.0  # exp(-1/x²) underflows
    assert in_support(x, y)
    assert log_phi(x, y) == pytest.approx(-1.0 / x ** 2, abs=1e-6)


@settings(max_examples=100)
@given(st.floats(min_value=0.02, max_value=2.0), st.floats(min_value=-0.49, max_value=0.49))
def test_support_lies_in_the_beak(x, s):
    y = psi(x) * (1.0 + s)
    if in_support(x, y):
        assert in_beak(x, y)
    assert log_phi(x, y) <= -1.0 / x ** 2 + 1e-12


def test_beak_boundaries():
    x = 0.3
    assert in_beak(x, psi(x))
    assert in_beak(x, 2.0 * psi(x) * (1 - 1e-12))
    assert not in_beak(x, 2.1 * psi(x))
    assert not in_beak(x, 0.4 * psi(x))
    assert in_beak(0.0, 0.0)
    assert not in_beak(0.0, 1e-3)


def test_paths_start_at_origin():
    with pytest.raises(ValueError):
        AnalyticPath((1.0, 1.0), (0.0, 1.0))
    path = AnalyticPath((0.0, 1.0), (0.0, 0.0, 1.0))
    assert path(0.5) == (0.5, 0.25)
    assert not path.is_constant()
    assert AnalyticPath((0.0,), (0.0,)).is_constant()


def test_random_paths_are_seeded():
    a = random_paths(5, 4, seed=3)
    b = random_paths(5, 4, seed=3)
    assert [p.x_coeffs for p in a] == [p.x_coeffs for p in b]
    assert all(len(p.x_coeffs) == 5 and not p.is_constant() for p in a)
    with pytest.raises(ValueError):
        random_paths(1, 0)


def test_default_grid():
    grid = default_t_grid()
    assert grid[0] == pytest.approx(1e-6)
    assert grid[-1] == pytest.approx(1.0)
    assert len(grid) == 200


@pytest.mark.parametrize("x,y", [
    ((0.0, 1.0), (0.0, 0.0, 1.0)),   # parabola stays above the beak
    ((0.0, 1.0), (0.0,)),            # the x axis stays below it
    ((0.0, -1.0), (0.0, 1.0)),       # x < 0
    ((0.0, 0.0, 1.0), (0.0, 0.0, 0.0, 1.0)),
])
def test_flat_along_simple_paths(x, y):
    report = probe_analytic_paths([AnalyticPath(x, y)])
    assert report.verdict == "PASS"
    assert report.paths[0].verified_u > 0.0


def test_flat_along_random_paths():
    report = probe_analytic_paths(random_paths(100, 4, seed=0))
    assert report.verdict == "PASS"
    assert len(report.to_dict()["paths"]) == 100


def test_probe_rejects_bad_input():
    with pytest.raises(ValueError):
        probe_analytic_paths([AnalyticPath((0.0,), (0.0,))])
    with pytest.raises(ValueError):
        probe_analytic_paths(random_paths(1, 2, seed=0), t_grid=[0.0, 0.5])


def test_positive_values_near_the_origin():
    report = probe_beak()
    assert report.verdict == "PASS"
    assert report.min_positive_distance < 1e-3
    assert all(s.outside_zero for s in report.samples)


def test_beak_grid_must_decrease():
    with pytest.raises(ValueError):
        probe_beak(np.array([0.1, 0.2]))
