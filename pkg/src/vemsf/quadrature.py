"""Quadrature on polygons (scaled boundary cubature) and on straight edges."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre

from .errors import GeometryError, InvalidParameterError
from .mesh import ElementGeometry


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        """Weighted sum over the leading (point) axis of ``values``."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class EdgeRule(QuadratureRule):
    # positions along the edge in [0, 1], matching ``points``
    params: np.ndarray = None


@lru_cache(maxsize=None)
def _gauss(n):
    t, w = legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_1d(n):
    """n-point Gauss-Legendre rule on [0, 1]; exact to degree 2n - 1."""
    if int(n) != n or not 1 <= n <= 30:
        raise InvalidParameterError(f"Gauss rule size must be in 1..30, got {n}")
    return _gauss(int(n))


def points_for_degree(degree):
    return max(1, math.ceil((degree + 1) / 2))


def sbc_polygon_rule(polygon, degree, base_point=None):
    """Scaled boundary cubature rule exact for polynomials of total degree ``degree``.

    Each edge spans a triangle with ``base_point``; mapping it as
    ``x0 + s (c(t) - x0)`` onto the unit square gives the Jacobian
    ``s * l_i * |e_i|`` with ``l_i`` the signed distance from ``x0`` to the
    edge line.  Works for nonconvex polygons (weights may be negative).
    ``base_point`` defaults to the first vertex.
    """
    verts = polygon.vertices if isinstance(polygon, ElementGeometry) else np.asarray(polygon, dtype=float)
    if degree < 0 or degree > 40:
        raise InvalidParameterError(f"SBC degree must be in 0..40, got {degree}")
    x0 = verts[0] if base_point is None else np.asarray(base_point, dtype=float)
    ends = np.roll(verts, -1, axis=0)
    d = ends - verts
    lengths = np.hypot(d[:, 0], d[:, 1])
    if np.any(lengths == 0):
        raise GeometryError("polygon has a degenerate (zero-length) edge")
    # l_i |e_i| = cross(v_i - x0, e_i)
    jac = (verts[:, 0] - x0[0]) * d[:, 1] - (verts[:, 1] - x0[1]) * d[:, 0]
    n = max(1, math.ceil((degree + 2) / 2))
    s, ws = _gauss(n)
    t, wt = _gauss(n)
    keep = jac != 0
    verts, d, jac = verts[keep], d[keep], jac[keep]
    # c(t) - x0 for each edge and t
    c = verts[:, None, :] + t[None, :, None] * d[:, None, :]
    pts = x0 + s[None, None, :, None] * (c[:, :, None, :] - x0)
    w = jac[:, None, None] * wt[None, :, None] * (ws * s)[None, None, :]
    return QuadratureRule(pts.reshape(-1, 2), w.reshape(-1))


def edge_rule(p0, p1, degree):
    """Gauss rule on the segment p0-p1 exact for traces of the given degree."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    length = float(np.hypot(*(p1 - p0)))
    if length == 0:
        raise GeometryError("edge endpoints coincide")
    t, w = _gauss(points_for_degree(degree))
    pts = p0 + t[:, None] * (p1 - p0)
    return EdgeRule(pts, w * length, params=t)


@lru_cache(maxsize=None)
def _lobatto(k):
    inner = legendre.Legendre.basis(k).deriv().roots() if k > 1 else np.array([])
    nodes = np.concatenate([[-1.0], np.sort(inner.real), [1.0]])
    nodes = 0.5 * (nodes + 1.0)
    # enforce exact symmetry about 1/2
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))
    nodes[0], nodes[-1] = 0.0, 1.0
    nodes.setflags(write=False)
    return nodes


def lobatto_edge_nodes(k):
    """The k + 1 Gauss-Lobatto points on [0, 1] (endpoints included)."""
    if int(k) != k or not 1 <= k <= 6:
        raise InvalidParameterError(f"edge order must be in 1..6, got {k}")
    return _lobatto(int(k))
