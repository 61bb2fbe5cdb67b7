import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.spatial.transform import Rotation

from geom3 import (
    GROUP_ORDERS, SOLIDS, Line, TangentLine, check_unit, line_distance, line_distance_matrix,
    line_set_distance, lines_equal, platonic_edges, platonic_vertices, rotate_line_about_radial_axis,
    rotation_about, signed_line_distance, solid_generators, unit, vec3,
)

coord = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
raw_vectors = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 0.1)
quaternions = st.tuples(coord, coord, coord, coord).filter(lambda q: np.linalg.norm(q) > 0.1)


@st.composite
def tangent_lines(draw):
    u = np.array(draw(raw_vectors))
    t = np.array(draw(raw_vectors))
    u = u / np.linalg.norm(u)
    assume(np.linalg.norm(t - np.dot(t, u) * u) > 0.1)
    return TangentLine.from_vectors(u, t)


def _well_posed(g1, g2):
    return np.linalg.norm(np.cross(g1.t, g2.t)) > 1e-4


def _group(generators):
    """All products of the generators, deduplicated by quaternion up to sign."""
    elements = [Rotation.identity()]
    keys = [np.array([0.0, 0.0, 0.0, 1.0])]
    frontier = list(elements)
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = s * g
                q = h.as_quat()
                if not any(min(np.abs(q - k).max(), np.abs(q + k).max()) < 1e-9 for k in keys):
                    keys.append(q)
                    elements.append(h)
                    nxt.append(h)
        frontier = nxt
        assert len(elements) <= 120
    return elements


# ───────── vectors ─────────────────────────────────────────────────────────
def test_vec3_is_frozen_and_validated():
    v = vec3(1, 2, 3)
    with pytest.raises(ValueError):
        v[0] = 5.0
    with pytest.raises(ValueError):
        vec3([1.0, 2.0])
    with pytest.raises(ValueError):
        vec3(1.0, math.nan, 0.0)


def test_unit_rejects_zero_vector():
    with pytest.raises(ValueError):
        unit((0.0, 0.0, 0.0))
    assert np.allclose(unit((0.0, 3.0, 4.0)), (0.0, 0.6, 0.8))


def test_check_unit_tolerance():
    check_unit((1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        check_unit((1.0 + 1e-6, 0.0, 0.0))


def test_tangent_line_requires_tangency():
    with pytest.raises(ValueError):
        TangentLine((1.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    g = TangentLine.from_vectors((2.0, 0.0, 0.0), (1.0, 1.0, 0.0))
    assert np.allclose(g.t, (0.0, 1.0, 0.0))


# ───────── distances ───────────────────────────────────────────────────────
@pytest.mark.parametrize("a,b,expected", [
    (Line((0, 0, 0), (1, 0, 0)), Line((0, 0, 1), (0, 1, 0)), 1.0),
    (Line((0, 0, 0), (1, 0, 0)), Line((5, 0, 0), (0, 1, 0)), 0.0),
    (Line((0, 0, 0), (1, 0, 0)), Line((3, 2, 0), (-1, 0, 0)), 2.0),
    (Line((1, 0, 0), (0, 0, 1)), Line((-1, 0, 0), (0, 1, 0)), 2.0),
])
def test_line_distance_examples(a, b, expected):
    assert line_distance(a, b) == pytest.approx(expected, abs=1e-12)


@given(tangent_lines(), tangent_lines())
def test_line_distance_is_symmetric_and_matches_matrix(g1, g2):
    assume(_well_posed(g1, g2))
    d = line_distance(g1, g2)
    assert d == pytest.approx(line_distance(g2, g1), abs=1e-12)
    assert d >= 0.0
    m = line_distance_matrix(np.array([g1.u, g2.u]), np.array([g1.t, g2.t]))
    assert m[0, 1] == pytest.approx(d, abs=1e-9)
    assert m[0, 0] == 0.0
    assert abs(signed_line_distance(g1, g2)) == pytest.approx(d, abs=1e-9)


@given(tangent_lines(), tangent_lines(), quaternions)
def test_line_distance_rotation_invariant(g1, g2, q):
    assume(_well_posed(g1, g2))
    rot = Rotation.from_quat(q)
    assert line_distance(g1.rotated(rot), g2.rotated(rot)) == pytest.approx(line_distance(g1, g2), abs=1e-9)


@given(tangent_lines())
def test_tangent_lines_of_one_point_meet(g):
    other = rotate_line_about_radial_axis(g, 1.0)
    assert line_distance(g, other) < 1e-12


@given(tangent_lines(), st.floats(min_value=-3.0, max_value=3.0))
def test_radial_rotation_keeps_tangency(g, delta):
    h = rotate_line_about_radial_axis(g, delta)
    assert np.allclose(h.u, g.u)
    assert abs(float(np.dot(h.u, h.t))) < 1e-12
    assert float(np.dot(g.t, h.t)) == pytest.approx(math.cos(delta), abs=1e-9)


@given(tangent_lines(), st.floats(min_value=-3.0, max_value=3.0), st.floats(min_value=-3.0, max_value=3.0))
def test_radial_rotations_compose(g, a, b):
    twice = rotate_line_about_radial_axis(rotate_line_about_radial_axis(g, a), b)
    once = rotate_line_about_radial_axis(g, a + b)
    assert lines_equal(twice, once)
    assert np.allclose(twice.t, once.t, atol=1e-12)


def test_lines_equal_ignores_direction_sign():
    g = TangentLine((1.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    assert lines_equal(g, g.flipped())
    assert not lines_equal(g, rotate_line_about_radial_axis(g, 1e-3))


def test_line_set_distance():
    lines = platonic_edges("cube").tangent_lines()
    assert line_set_distance(lines, list(reversed(lines))) == 0.0
    assert line_set_distance(lines, lines[:-1]) == math.inf
    moved = [rotate_line_about_radial_axis(g, 0.1) for g in lines]
    assert line_set_distance(lines, moved) > 0.05


# ───────── solids ──────────────────────────────────────────────────────────
@pytest.mark.parametrize("solid,vertices,edges", [
    ("tetrahedron", 4, 6), ("cube", 8, 12), ("octahedron", 6, 12),
    ("icosahedron", 12, 30), ("dodecahedron", 20, 30),
])
def test_solid_counts(solid, vertices, edges):
    verts = platonic_vertices(solid)
    assert verts.shape == (vertices, 3)
    assert np.allclose(np.linalg.norm(verts, axis=1), 1.0)
    assert len(platonic_edges(solid)) == edges


def test_unknown_solid():
    with pytest.raises(ValueError):
        platonic_vertices("sphere")


@pytest.mark.parametrize("solid", SOLIDS)
def test_generators_span_the_rotation_group(solid):
    assert len(_group(solid_generators(solid))) == GROUP_ORDERS[solid]


@pytest.mark.parametrize("solid", SOLIDS)
def test_edge_lines_are_group_invariant(solid):
    lines = platonic_edges(solid).tangent_lines()
    for rot in solid_generators(solid):
        assert line_set_distance(lines, [g.rotated(rot) for g in lines]) < 1e-9


@settings(max_examples=25)
@given(st.sampled_from(SOLIDS), st.floats(min_value=0.0, max_value=math.pi))
def test_radial_rotation_commutes_with_symmetries(solid, delta):
    lines = platonic_edges(solid).tangent_lines()
    turned = [rotate_line_about_radial_axis(g, delta) for g in lines]
    for rot in solid_generators(solid):
        assert line_set_distance(turned, [g.rotated(rot) for g in turned]) < 1e-9


def test_rotation_about_is_right_handed():
    rot = rotation_about((0, 0, 1), math.pi / 2)
    assert np.allclose(rot.apply((1.0, 0.0, 0.0)), (0.0, 1.0, 0.0))
