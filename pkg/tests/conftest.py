import math
import sys

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from vemsf.mesh import polygon_geometry


def random_convex_polygon(rng, n_points=12, center=(2.0, 3.0), scale=1.0):
    while True:
        pts = rng.uniform(-1, 1, size=(n_points, 2))
        hull = ConvexHull(pts)
        ring = pts[hull.vertices]
        if len(ring) >= 3:
            return np.asarray(center) + scale * ring


def random_star_polygon(rng, n=9, center=(2.0, 3.0), scale=1.0):
    """Simple, generally nonconvex polygon: random radii at sorted random angles."""
    # jittered angles keep the ring star-shaped about the center
    ang = np.linspace(0, 2 * math.pi, n, endpoint=False) + rng.uniform(-0.25, 0.25, n) * (2 * math.pi / n)
    r = rng.uniform(0.35, 1.0, n)
    return np.asarray(center) + scale * np.column_stack([r * np.cos(ang), r * np.sin(ang)])


def random_polygons(seed, count, kind="mixed"):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        if kind == "convex" or (kind == "mixed" and i % 2 == 0):
            out.append(random_convex_polygon(rng, n_points=int(rng.integers(5, 14))))
        else:
            out.append(random_star_polygon(rng, n=int(rng.integers(5, 11))))
    return out


def _triangle_monomial(tri, a, b):
    """Exact integral of x^a y^b over a triangle (signed by orientation).

    Expands the monomial in barycentric coordinates and uses
    int l1^i l2^j l3^k = 2|T| i! j! k! / (i + j + k + 2)!.
    """
    (x1, y1), (x2, y2), (x3, y3) = tri
    area2 = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
    poly = {(0, 0, 0): 1.0}

    def times(p, c):
        out = {}
        for (i, j, k), v in p.items():
            for d, cd in zip(((1, 0, 0), (0, 1, 0), (0, 0, 1)), c):
                key = (i + d[0], j + d[1], k + d[2])
                out[key] = out.get(key, 0.0) + v * cd
        return out

    for _ in range(a):
        poly = times(poly, (x1, x2, x3))
    for _ in range(b):
        poly = times(poly, (y1, y2, y3))
    total = 0.0
    for (i, j, k), v in poly.items():
        total += v * math.factorial(i) * math.factorial(j) * math.factorial(k) / math.factorial(i + j + k + 2)
    return area2 * total


def fan_monomial_integral(vertices, a, b, apex=(0.0, 0.0)):
    """Signed fan triangulation from ``apex``; exact for any simple polygon."""
    v = np.asarray(vertices, dtype=float)
    apex = np.asarray(apex, dtype=float)
    return sum(_triangle_monomial((apex, v[i], v[(i + 1) % len(v)]), a, b) for i in range(len(v)))


def monomial_pairs(max_degree):
    return [(a, d - a) for d in range(max_degree + 1) for a in range(d + 1)]


@pytest.fixture
def unit_square():
    return polygon_geometry([[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture
def hexagon():
    t = np.arange(6) * math.pi / 3
    return polygon_geometry(np.column_stack([np.cos(t), np.sin(t)]))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
