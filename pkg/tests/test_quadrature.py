import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fan_monomial_integral, monomial_pairs, random_polygons
from vemsf.errors import GeometryError, InvalidParameterError
from vemsf.quadrature import edge_rule, gauss_1d, lobatto_edge_nodes, sbc_polygon_rule


def test_unit_square_area_and_first_moment(unit_square):
    rule = sbc_polygon_rule(unit_square, 2)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert rule.integrate(rule.points[:, 0]) == pytest.approx(0.5, abs=1e-15)


def test_triangle_x_squared():
    rule = sbc_polygon_rule(np.array([[0, 0], [1, 0], [0, 1]]), 2)
    assert rule.integrate(rule.points[:, 0] ** 2) == pytest.approx(1 / 12, rel=1e-14)


def test_l_shape_area_and_centroid():
    L = np.array([[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float)
    rule = sbc_polygon_rule(L, 1)
    assert rule.weights.sum() == pytest.approx(3.0, abs=1e-14)
    centroid = rule.integrate(rule.points) / 3.0
    np.testing.assert_allclose(centroid, [5 / 6, 5 / 6], atol=1e-14)


@pytest.mark.parametrize("degree", [0, 3, 6, 10])
def test_monomials_against_fan_oracle(degree):
    for verts in random_polygons(7, 10):
        rule = sbc_polygon_rule(verts, degree)
        for a, b in monomial_pairs(degree):
            exact = fan_monomial_integral(verts, a, b)
            got = rule.integrate(rule.points[:, 0] ** a * rule.points[:, 1] ** b)
            assert got == pytest.approx(exact, rel=1e-12)


def test_base_point_does_not_matter():
    verts = random_polygons(3, 1, "convex")[0]
    f = lambda p: np.exp(p[:, 0]) * np.cos(p[:, 1])
    r0 = sbc_polygon_rule(verts, 16)
    r1 = sbc_polygon_rule(verts, 16, base_point=verts.mean(axis=0))
    assert r0.integrate(f(r0.points)) == pytest.approx(r1.integrate(f(r1.points)), rel=1e-12)


def test_translation_changes_nothing_for_constants():
    verts = random_polygons(4, 1, "nonconvex")[0]
    a = sbc_polygon_rule(verts, 4).weights.sum()
    b = sbc_polygon_rule(verts + [10.0, -7.0], 4).weights.sum()
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), degree=st.integers(0, 8))
def test_property_sbc_exact_on_random_polygons(seed, degree):
    verts = random_polygons(seed, 2)[seed % 2]
    rule = sbc_polygon_rule(verts, degree)
    a = degree // 2
    b = degree - a
    exact = fan_monomial_integral(verts, a, b)
    assert rule.integrate(rule.points[:, 0] ** a * rule.points[:, 1] ** b) == pytest.approx(exact, rel=1e-12)


def test_degenerate_edge_rejected():
    with pytest.raises(GeometryError):
        sbc_polygon_rule(np.array([[0, 0], [1, 0], [1, 0], [0, 1]], dtype=float), 2)


def test_bad_degree_rejected(unit_square):
    with pytest.raises(InvalidParameterError):
        sbc_polygon_rule(unit_square, -1)


def test_gauss_exactness():
    for n in (1, 2, 5, 12):
        t, w = gauss_1d(n)
        for p in range(2 * n):
            assert (w * t**p).sum() == pytest.approx(1.0 / (p + 1), rel=1e-13)
    with pytest.raises(InvalidParameterError):
        gauss_1d(0)


def test_edge_rule_integrates_polynomial_traces():
    p0, p1 = np.array([1.0, 2.0]), np.array([4.0, 6.0])
    rule = edge_rule(p0, p1, 7)
    # int_0^1 t^7 dt times length 5
    assert rule.integrate(rule.params**7) == pytest.approx(5.0 / 8.0, rel=1e-14)
    assert rule.weights.sum() == pytest.approx(5.0, rel=1e-15)
    with pytest.raises(GeometryError):
        edge_rule(p0, p0, 2)


@pytest.mark.parametrize(
    "k, expected",
    [
        (1, [0.0, 1.0]),
        (2, [0.0, 0.5, 1.0]),
        (3, [0.0, 0.5 - math.sqrt(5) / 10, 0.5 + math.sqrt(5) / 10, 1.0]),
    ],
)
def test_lobatto_nodes(k, expected):
    np.testing.assert_allclose(lobatto_edge_nodes(k), expected, atol=1e-15)


def test_lobatto_symmetry_and_range():
    for k in range(1, 7):
        t = lobatto_edge_nodes(k)
        np.testing.assert_allclose(t, 1.0 - t[::-1], rtol=0, atol=1e-15)
    with pytest.raises(InvalidParameterError):
        lobatto_edge_nodes(7)
