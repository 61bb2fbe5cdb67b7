import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cylinders import c6_config, common_radius
from exporters import canonical_lines
from geom3 import line_set_distance, rotation_about
import unlockd3
from unlockd3 import (
    FIRSCHING_RADIUS, PAIR_TYPES, R_M, VARIANTS, D3Params, cm_report, d3_family, find_cm,
    gamma_curve, gamma_point,
)

params = st.builds(
    D3Params,
    st.floats(min_value=0.0, max_value=0.8),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.5, max_value=1.5),
)


def test_record_constant():
    assert R_M == pytest.approx(1.0930703308, abs=1e-10)
    assert R_M > FIRSCHING_RADIUS


def test_pair_types():
    counts = {}
    for kind in PAIR_TYPES.values():
        counts[kind] = counts.get(kind, 0) + 1
    assert counts == {"A": 6, "B": 3, "C": 3, "D": 3}
    assert PAIR_TYPES[(0, 1)] == "B"
    assert PAIR_TYPES[(1, 2)] == "C"
    assert PAIR_TYPES[(0, 3)] == "D"
    assert PAIR_TYPES[(0, 2)] == "A"


@pytest.mark.parametrize("variant", VARIANTS)
def test_identity_member_is_c6(variant):
    assert canonical_lines(d3_family(D3Params(0.0), variant)) == canonical_lines(c6_config())


def test_phi_range():
    with pytest.raises(ValueError):
        d3_family(D3Params(math.pi / 2))
    with pytest.raises(ValueError):
        gamma_point(0.9)
    with pytest.raises(ValueError):
        gamma_curve(1)


@settings(max_examples=30, deadline=None)
@given(params)
def test_family_is_d3_symmetric(p):
    config = d3_family(p)
    lines = config.generatrices
    for rot in (rotation_about((0, 0, 1), 2 * math.pi / 3),
                rotation_about((math.cos(math.pi / 6), math.sin(math.pi / 6), 0.0), math.pi)):
        assert line_set_distance(lines, [g.rotated(rot) for g in lines]) < 1e-9


@settings(max_examples=20, deadline=None)
@given(params)
def test_pair_types_share_distances(p):
    from cylinders import generatrix_distances
    d = generatrix_distances(d3_family(p))
    by_kind = {}
    for (i, j), kind in PAIR_TYPES.items():
        by_kind.setdefault(kind, []).append(d[i, j])
    for kind in ("B", "C", "D"):
        assert max(by_kind[kind]) - min(by_kind[kind]) < 1e-9


def test_gamma_at_zero_improves_on_c6():
    g = gamma_point(0.0, starts=4)
    assert g.r_star >= 1.0 - 1e-12
    assert g.r_star == pytest.approx(common_radius(d3_family(D3Params(0.0, g.kappa_star, g.delta_star))))


def test_gamma_at_zero_is_c6():
    g = gamma_point(0.0)
    assert g.kappa_star == pytest.approx(0.0, abs=1e-6)
    assert g.delta_star == pytest.approx(0.0, abs=1e-6)
    assert g.r_star == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("phi", [0.15, 0.3])
def test_gamma_point_is_a_local_maximum(phi):
    g = gamma_point(phi)
    for dk, dd in ((1e-4, 0.0), (-1e-4, 0.0), (0.0, 1e-4), (0.0, -1e-4)):
        r = common_radius(d3_family(D3Params(phi, g.kappa_star + dk, g.delta_star + dd)))
        assert r <= g.r_star + 1e-7


def test_gamma_curve_grid():
    points = gamma_curve(3)
    assert [p.phi for p in points] == pytest.approx([0.0, 0.4, 0.8])
    assert all(p.r_star > 0 for p in points)


@pytest.mark.slow
def test_record_configuration():
    result = find_cm()
    assert result.radius == pytest.approx(R_M, abs=1e-9)
    assert result.radius > FIRSCHING_RADIUS
    assert common_radius(result.config) == pytest.approx(result.radius, abs=1e-12)


@pytest.mark.slow
def test_cm_report():
    report = cm_report()
    assert report["beats_firsching"]
    assert abs(report["deviation"]) < 1e-9
    assert report["contacts"] > 0
    assert set(report["geodetic"]) == {"colatitude", "tangent_point_distance", "direction_angle"}


@pytest.mark.slow
def test_gamma_rises_then_falls():
    radii = [p.r_star for p in gamma_curve(16)]
    top = int(np.argmax(radii))
    assert 0 < top < len(radii) - 1
    assert all(b >= a - 1e-9 for a, b in zip(radii[:top], radii[1:top + 1]))
    assert all(b <= a + 1e-9 for a, b in zip(radii[top:], radii[top + 1:]))


def test_record_search_that_misses_raises(monkeypatch):
    monkeypatch.setattr(unlockd3, "_search_cm", lambda variant: (D3Params(0.0), 1.0))
    with pytest.raises(RuntimeError, match="find_cm stalled"):
        unlockd3._find_cm_cached.__wrapped__(0)
