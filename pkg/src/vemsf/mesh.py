"""Polygonal meshes: storage, validation, generators and a small text format.

Cells are counterclockwise rings of vertex indices.  Boundary edges are
stored as ``(cell, local_edge, group)`` where local edge ``i`` joins ring
positions ``i`` and ``i + 1``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import Voronoi, cKDTree

from .errors import GeometryError, InvalidParameterError, MeshParseError, MeshValidationError

log = logging.getLogger(__name__)

FAMILIES = (
    "uniform",
    "voronoi_random",
    "voronoi_lloyd",
    "nonconvex_split",
    "regular_ngon",
    "grid_with_inserted_nodes",
)

# points closer than this fraction of the domain diagonal are the same point
COINCIDENT_TOL = 1e-12


def signed_area(points):
    """Shoelace signed area of a closed polygon given as an (n, 2) array."""
    p = np.asarray(points, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(points):
    p = np.asarray(points, dtype=float)
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    area = 0.5 * cross.sum()
    cx = ((p[:, 0] + q[:, 0]) * cross).sum() / (6.0 * area)
    cy = ((p[:, 1] + q[:, 1]) * cross).sum() / (6.0 * area)
    return np.array([cx, cy])


def _segments_intersect(p1, p2, q1, q2):
    """Proper or touching intersection test for two closed segments."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_segment(a, b, c):
        return (
            min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])
        )

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and on_segment(q1, q2, p1):
        return True
    if d2 == 0 and on_segment(q1, q2, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, q1):
        return True
    if d4 == 0 and on_segment(p1, p2, q2):
        return True
    return False


def is_simple_polygon(points):
    """True when no two non-adjacent edges of the ring touch."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    for i in range(n):
        a1, a2 = p[i], p[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if _segments_intersect(a1, a2, p[j], p[(j + 1) % n]):
                return False
    return True


@dataclass(frozen=True)
class ElementGeometry:
    """Geometric data of one polygonal cell."""

    vertices: np.ndarray
    centroid: np.ndarray
    diameter: float
    area: float
    edge_lengths: np.ndarray
    normals: np.ndarray

    @property
    def n_vertices(self):
        return len(self.vertices)

    def edge(self, i):
        n = len(self.vertices)
        return self.vertices[i], self.vertices[(i + 1) % n]

    def translated(self, shift):
        return polygon_geometry(self.vertices + np.asarray(shift, dtype=float))


def polygon_geometry(vertices):
    """Build :class:`ElementGeometry` from a counterclockwise vertex array."""
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise GeometryError("a polygon needs at least three 2D vertices")
    area = signed_area(v)
    if not area > 0:
        raise GeometryError(f"polygon has non-positive signed area {area:g}")
    d = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(d[:, 0], d[:, 1])
    if np.any(lengths == 0):
        raise GeometryError("polygon has a zero-length edge")
    normals = np.column_stack([d[:, 1], -d[:, 0]]) / lengths[:, None]
    diff = v[:, None, :] - v[None, :, :]
    diameter = float(np.sqrt((diff**2).sum(axis=-1)).max())
    v.setflags(write=False)
    return ElementGeometry(
        vertices=v,
        centroid=polygon_centroid(v),
        diameter=diameter,
        area=area,
        edge_lengths=lengths,
        normals=normals,
    )


@dataclass(frozen=True)
class PolygonalMesh:
    vertices: np.ndarray
    cells: tuple
    boundary_edges: tuple = ()
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "cells", tuple(tuple(int(i) for i in c) for c in self.cells))
        object.__setattr__(
            self,
            "boundary_edges",
            tuple((int(c), int(e), str(g)) for c, e, g in self.boundary_edges),
        )

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_vertices(self):
        return len(self.vertices)

    def cell_points(self, cell):
        return self.vertices[list(self.cells[cell])]

    def cell_edges(self, cell):
        ring = self.cells[cell]
        n = len(ring)
        return [(ring[i], ring[(i + 1) % n]) for i in range(n)]

    def edges(self):
        """Unique undirected edges as sorted vertex pairs, in first-visit order."""
        seen = {}
        for c in range(self.n_cells):
            for a, b in self.cell_edges(c):
                key = (a, b) if a < b else (b, a)
                if key not in seen:
                    seen[key] = len(seen)
        return list(seen)

    def boundary_groups(self):
        groups = {}
        for c, e, g in self.boundary_edges:
            groups.setdefault(g, []).append((c, e))
        return groups

    def total_area(self):
        return sum(signed_area(self.cell_points(c)) for c in range(self.n_cells))

    def bounding_diagonal(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def __eq__(self, other):
        if not isinstance(other, PolygonalMesh):
            return NotImplemented
        return (
            self.vertices.shape == other.vertices.shape
            and np.array_equal(self.vertices, other.vertices)
            and self.cells == other.cells
            and self.boundary_edges == other.boundary_edges
        )

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.cells, self.boundary_edges))


def element_geometry(mesh, cell):
    if not 0 <= cell < mesh.n_cells:
        raise IndexError(f"cell index {cell} out of range for {mesh.n_cells} cells")
    return polygon_geometry(mesh.cell_points(cell))


def validate_mesh(mesh, tol=COINCIDENT_TOL):
    """Check the structural invariants; raise :class:`MeshValidationError`."""
    scale = mesh.bounding_diagonal() or 1.0
    eps = tol * scale
    nv = mesh.n_vertices
    directed = {}
    for c, ring in enumerate(mesh.cells):
        if len(ring) < 3 or len(set(ring)) != len(ring):
            raise MeshValidationError(f"cell {c} needs at least 3 distinct vertices, got {ring}")
        if min(ring) < 0 or max(ring) >= nv:
            raise MeshValidationError(f"cell {c} references a missing vertex")
        pts = mesh.vertices[list(ring)]
        gaps = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        if np.any(gaps <= eps):
            raise MeshValidationError(f"cell {c} has coincident consecutive vertices")
        if not signed_area(pts) > 0:
            raise MeshValidationError(f"cell {c} is not counterclockwise")
        n = len(ring)
        for i in range(n):
            key = (ring[i], ring[(i + 1) % n])
            if key in directed:
                raise MeshValidationError(
                    f"edge {key} used twice with the same orientation (cells {directed[key][0]} and {c})"
                )
            directed[key] = (c, i)
    unpaired = {}
    for (a, b), (c, i) in directed.items():
        if (b, a) not in directed:
            unpaired[(c, i)] = (a, b)
    # hanging vertices on unpaired edges mean a T-junction
    tree = cKDTree(mesh.vertices)
    for (c, i), (a, b) in unpaired.items():
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        mid = 0.5 * (pa + pb)
        half = 0.5 * float(np.hypot(*(pb - pa)))
        for j in tree.query_ball_point(mid, half + eps):
            if j in (a, b):
                continue
            q = mesh.vertices[j]
            d = pb - pa
            t = float(np.dot(q - pa, d) / np.dot(d, d))
            dist = abs(d[0] * (q[1] - pa[1]) - d[1] * (q[0] - pa[0])) / np.hypot(*d)
            if 0 < t < 1 and dist <= eps:
                raise MeshValidationError(
                    f"nonconforming mesh: vertex {j} hangs on edge {i} of cell {c}"
                )
    listed = set()
    for c, e, g in mesh.boundary_edges:
        if not 0 <= c < mesh.n_cells or not 0 <= e < len(mesh.cells[c]):
            raise MeshValidationError(f"boundary entry ({c}, {e}) out of range")
        if (c, e) not in unpaired:
            raise MeshValidationError(f"boundary entry ({c}, {e}, {g}) is an interior edge")
        if (c, e) in listed:
            raise MeshValidationError(f"boundary entry ({c}, {e}) listed twice")
        listed.add((c, e))
    if mesh.boundary_edges and len(listed) != len(unpaired):
        missing = sorted(set(unpaired) - listed)[:5]
        raise MeshValidationError(f"boundary edges without a group, e.g. {missing}")
    return mesh


# ---------------------------------------------------------------- generators


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def _box(params):
    box = tuple(float(b) for b in params.get("box", (0.0, 1.0, 0.0, 1.0)))
    if len(box) != 4 or not (box[1] > box[0] and box[3] > box[2]):
        raise InvalidParameterError(f"box must be (x0, x1, y0, y1) with positive extent, got {box}")
    return box


def _positive_int(params, name, minimum=1, default=None):
    value = params.get(name, default)
    if value is None:
        raise InvalidParameterError(f"missing parameter {name!r}")
    if int(value) != value or value < minimum:
        raise InvalidParameterError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def _tag_box_boundary(vertices, cells, box, hole=None):
    """Group unpaired edges by the box side (or hole) they lie on."""
    x0, x1, y0, y1 = box
    eps = COINCIDENT_TOL * math.hypot(x1 - x0, y1 - y0) * 1e3
    directed = set()
    for ring in cells:
        n = len(ring)
        directed.update((ring[i], ring[(i + 1) % n]) for i in range(n))
    boundary = []
    for c, ring in enumerate(cells):
        n = len(ring)
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            if (b, a) in directed:
                continue
            pa, pb = vertices[a], vertices[b]
            if abs(pa[0] - x0) <= eps and abs(pb[0] - x0) <= eps:
                group = "left"
            elif abs(pa[0] - x1) <= eps and abs(pb[0] - x1) <= eps:
                group = "right"
            elif abs(pa[1] - y0) <= eps and abs(pb[1] - y0) <= eps:
                group = "bottom"
            elif abs(pa[1] - y1) <= eps and abs(pb[1] - y1) <= eps:
                group = "top"
            elif hole is not None:
                group = "hole"
            else:
                raise MeshValidationError(f"boundary edge {i} of cell {c} is not on the domain box")
            boundary.append((c, i, group))
    return boundary


def uniform_mesh(nx, ny, box=(0.0, 1.0, 0.0, 1.0)):
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    vertices = np.array([(x, y) for y in ys for x in xs])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = [
        (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
        for j in range(ny)
        for i in range(nx)
    ]
    return PolygonalMesh(vertices, cells, _tag_box_boundary(vertices, cells, box))


def nonconvex_split_mesh(nx, ny, box=(0.0, 1.0, 0.0, 1.0)):
    """Rectangles cut by a three-segment zig-zag into a convex quad and a reflex hexagon.

    The cut runs from the bottom-left to the bottom-right corner through
    ``A = (w/3, 3H/4)`` and ``B = (2w/3, H/2)`` (cell-local), so the drop
    between the two interior kinks is a quarter of the cell height.
    """
    base = uniform_mesh(nx, ny, box)
    vertices = [tuple(p) for p in base.vertices]
    w = (box[1] - box[0]) / nx
    h = (box[3] - box[2]) / ny
    cells = []
    for bl, br, tr, tl in base.cells:
        x, y = base.vertices[bl]
        a = len(vertices)
        vertices.append((x + w / 3.0, y + 0.75 * h))
        b = len(vertices)
        vertices.append((x + 2.0 * w / 3.0, y + 0.5 * h))
        cells.append((bl, br, b, a))
        cells.append((br, tr, tl, bl, a, b))
    vertices = np.array(vertices)
    return PolygonalMesh(vertices, cells, _tag_box_boundary(vertices, cells, box))


def regular_ngon_mesh(n, circumradius=1.0, center=(0.0, 0.0), rotation=0.0):
    if n < 3:
        raise InvalidParameterError(f"a regular polygon needs n >= 3, got {n}")
    if not circumradius > 0:
        raise InvalidParameterError("circumradius must be positive")
    t = rotation + 2.0 * np.pi * np.arange(n) / n
    vertices = np.column_stack([center[0] + circumradius * np.cos(t), center[1] + circumradius * np.sin(t)])
    cells = [tuple(range(n))]
    boundary = [(0, i, "boundary") for i in range(n)]
    return PolygonalMesh(vertices, cells, boundary)


def inserted_nodes_mesh(n_nodes):
    """3x3 grid on the unit square whose central cell carries ``n_nodes`` vertices.

    The ``n_nodes - 4`` extra vertices are distributed round-robin over the
    central cell's edges (bottom, right, top, left) and equispaced along each
    edge; the neighbouring cells share them so the mesh stays conforming.
    """
    if n_nodes < 4:
        raise InvalidParameterError(f"central cell needs at least 4 nodes, got {n_nodes}")
    base = uniform_mesh(3, 3)
    vertices = [tuple(p) for p in base.vertices]
    cells = [list(c) for c in base.cells]
    extra = n_nodes - 4
    counts = [extra // 4 + (1 if j < extra % 4 else 0) for j in range(4)]
    central = cells[4]
    # neighbours across the central edges: bottom=1, right=5, top=7, left=3
    neighbours = [1, 5, 7, 3]
    new_central = []
    for j in range(4):
        a, b = central[j], central[(j + 1) % 4]
        pa, pb = np.array(vertices[a]), np.array(vertices[b])
        ids = []
        for i in range(counts[j]):
            t = (i + 1) / (counts[j] + 1)
            ids.append(len(vertices))
            vertices.append(tuple(pa + t * (pb - pa)))
        new_central.append(a)
        new_central.extend(ids)
        ring = cells[neighbours[j]]
        # the neighbour traverses the shared edge as (b, a)
        pos = next(p for p in range(len(ring)) if ring[p] == b and ring[(p + 1) % len(ring)] == a)
        cells[neighbours[j]] = ring[: pos + 1] + ids[::-1] + ring[pos + 1 :]
    cells[4] = new_central
    vertices = np.array(vertices)
    box = (0.0, 1.0, 0.0, 1.0)
    return PolygonalMesh(vertices, cells, _tag_box_boundary(vertices, cells, box))


def _in_domain(points, box, hole):
    x0, x1, y0, y1 = box
    ok = (points[:, 0] > x0) & (points[:, 0] < x1) & (points[:, 1] > y0) & (points[:, 1] < y1)
    if hole is not None:
        c, r = hole
        ok &= np.hypot(points[:, 0] - c[0], points[:, 1] - c[1]) > r
    return ok


def _sample_seeds(rng, n, box, hole):
    x0, x1, y0, y1 = box
    out = np.empty((0, 2))
    while len(out) < n:
        cand = rng.uniform((x0, y0), (x1, y1), size=(2 * n, 2))
        out = np.vstack([out, cand[_in_domain(cand, box, hole)]])
    return out[:n]


def _voronoi_cells(seeds, box, hole=None, collapse_tol=0.0):
    """Voronoi cells of ``seeds`` clipped to the box (minus an optional disk).

    Clipping uses mirror images: reflecting every seed across each box side
    makes the side lines exact bisectors.  For a circular hole, seeds near the
    circle are reflected through it, which turns the hole boundary into a
    chain of straight bisector edges; those vertices are then projected onto
    the circle.  With ``collapse_tol > 0`` (box domains only) edges shorter
    than ``collapse_tol * sqrt(area / n)`` are collapsed to a point; vertices
    on the box sides keep their side.
    """
    x0, x1, y0, y1 = box
    n = len(seeds)
    mirrors = [
        np.column_stack([2 * x0 - seeds[:, 0], seeds[:, 1]]),
        np.column_stack([2 * x1 - seeds[:, 0], seeds[:, 1]]),
        np.column_stack([seeds[:, 0], 2 * y0 - seeds[:, 1]]),
        np.column_stack([seeds[:, 0], 2 * y1 - seeds[:, 1]]),
    ]
    if hole is not None:
        (cx, cy), radius = hole
        free_area = (x1 - x0) * (y1 - y0) - np.pi * radius**2
        reach = 1.5 * math.sqrt(free_area / n)
        rel = seeds - (cx, cy)
        r = np.hypot(rel[:, 0], rel[:, 1])
        near = r < radius + reach
        scale = (2 * radius - r[near]) / r[near]
        mirrors.append(np.array((cx, cy)) + rel[near] * scale[:, None])
    points = np.vstack([seeds] + mirrors)
    vor = Voronoi(points)
    diag = math.hypot(x1 - x0, y1 - y0)
    eps = COINCIDENT_TOL * diag
    raw_cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if not region or -1 in region:
            raise GeometryError(f"Voronoi cell of seed {i} is unbounded")
        pts = vor.vertices[region]
        ang = np.arctan2(pts[:, 1] - seeds[i, 1], pts[:, 0] - seeds[i, 0])
        raw_cells.append([region[j] for j in np.argsort(ang)])
    used = sorted({v for ring in raw_cells for v in ring})
    coords = vor.vertices[used].copy()
    # snap to the exact box sides
    for axis, lo, hi in ((0, x0, x1), (1, y0, y1)):
        coords[np.abs(coords[:, axis] - lo) <= 1e3 * eps, axis] = lo
        coords[np.abs(coords[:, axis] - hi) <= 1e3 * eps, axis] = hi
    remap = {v: j for j, v in enumerate(used)}
    cells = [[remap[v] for v in ring] for ring in raw_cells]
    # merge near-coincident vertices
    tree = cKDTree(coords)
    parent = list(range(len(coords)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merge_tol = max(eps, 1e-10 * diag)
    for a, b in sorted(tree.query_pairs(merge_tol)):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    if collapse_tol > 0 and hole is None:
        _collapse_short_edges(coords, cells, find, parent, box, collapse_tol * math.sqrt((x1 - x0) * (y1 - y0) / n), eps)
    roots = sorted({find(a) for a in range(len(coords))})
    index = {r: j for j, r in enumerate(roots)}
    vertices = coords[roots]
    merged = []
    for ring in cells:
        out = []
        for v in ring:
            j = index[find(v)]
            if not out or out[-1] != j:
                out.append(j)
        if len(out) > 1 and out[0] == out[-1]:
            out.pop()
        if len(out) < 3:
            raise GeometryError("Voronoi cell collapsed after vertex merging")
        merged.append(out)
    cells = merged
    if hole is not None:
        boundary = _tag_box_boundary(vertices, cells, box, hole)
        on_hole = {cells[c][e] for c, e, g in boundary if g == "hole"}
        on_hole |= {cells[c][(e + 1) % len(cells[c])] for c, e, g in boundary if g == "hole"}
        (cx, cy), radius = hole
        for v in sorted(on_hole):
            d = vertices[v] - (cx, cy)
            vertices[v] = (cx, cy) + d * (radius / np.hypot(*d))
        # projection can leave hole points a hair off the symmetry sides
        for axis, lo, hi in ((0, x0, x1), (1, y0, y1)):
            vertices[np.abs(vertices[:, axis] - lo) <= 1e3 * eps, axis] = lo
            vertices[np.abs(vertices[:, axis] - hi) <= 1e3 * eps, axis] = hi
        for ring in cells:
            if not signed_area(vertices[ring]) > 0:
                raise GeometryError("hole projection inverted a cell")
    boundary = _tag_box_boundary(vertices, cells, box, hole)
    return vertices, cells, boundary


def _side_set(p, box, eps):
    x0, x1, y0, y1 = box
    return frozenset(
        i for i, hit in enumerate((abs(p[0] - x0) <= eps, abs(p[0] - x1) <= eps, abs(p[1] - y0) <= eps, abs(p[1] - y1) <= eps)) if hit
    )


def _collapse_short_edges(coords, cells, find, parent, box, threshold, eps):
    """Merge the endpoints of edges shorter than ``threshold`` (in place)."""
    edges = sorted({tuple(sorted((ring[i], ring[(i + 1) % len(ring)]))) for ring in cells for i in range(len(ring))})
    edges.sort(key=lambda e: np.hypot(*(coords[e[0]] - coords[e[1]])))
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb or np.hypot(*(coords[ra] - coords[rb])) >= threshold:
            continue
        sa, sb = _side_set(coords[ra], box, eps), _side_set(coords[rb], box, eps)
        if sa < sb or (sa == sb and rb < ra):
            ra, rb, sa, sb = rb, ra, sb, sa
        if not sb <= sa:
            continue
        if sa == sb:
            coords[ra] = 0.5 * (coords[ra] + coords[rb])
        parent[rb] = ra


def voronoi_mesh(
    n_seeds, box=(0.0, 1.0, 0.0, 1.0), iterations=0, seed=0, hole=None, min_vertices=3, max_attempts=100, collapse_tol=0.0
):
    """Clipped Voronoi mesh, optionally Lloyd-relaxed.

    Lloyd iteration replaces each seed by the centroid of its clipped cell.
    With ``min_vertices=4`` fresh seed sets are drawn from the same stream
    until no cell is a triangle (needed for cubic elements).
    """
    rng = _rng(seed)
    for _ in range(max_attempts):
        seeds = _sample_seeds(rng, n_seeds, box, hole)
        for _ in range(iterations):
            vertices, cells, _ = _voronoi_cells(seeds, box, hole)
            seeds = np.array([polygon_centroid(vertices[ring]) for ring in cells])
        vertices, cells, boundary = _voronoi_cells(seeds, box, hole, collapse_tol)
        if min(len(c) for c in cells) >= min_vertices:
            meta = {"n_seeds": n_seeds, "lloyd_iterations": iterations, "seed": seed, "seeds": seeds}
            if collapse_tol:
                meta["collapse_tol"] = collapse_tol
            return PolygonalMesh(vertices, cells, boundary, meta)
    raise GeometryError(f"no Voronoi mesh with cells of >= {min_vertices} vertices after {max_attempts} draws")


def generate_mesh(family, params=None, seed=0):
    """Generate a mesh of the named family.

    ``params`` per family:

    * uniform, nonconvex_split: ``nx``, ``ny``, optional ``box``
    * voronoi_random: ``n_seeds``, optional ``box``, ``hole=((cx, cy), r)``, ``min_vertices``
    * voronoi_lloyd: as voronoi_random plus ``iterations`` (default 3)
    * both Voronoi families accept ``collapse_tol`` (short-edge collapse, box domains)
    * regular_ngon: ``n``, optional ``circumradius``, ``center``, ``rotation``
    * grid_with_inserted_nodes: ``n_nodes`` (vertex count of the central cell)
    """
    params = dict(params or {})
    if family == "uniform":
        mesh = uniform_mesh(_positive_int(params, "nx"), _positive_int(params, "ny"), _box(params))
    elif family == "nonconvex_split":
        mesh = nonconvex_split_mesh(_positive_int(params, "nx"), _positive_int(params, "ny"), _box(params))
    elif family in ("voronoi_random", "voronoi_lloyd"):
        iterations = 0 if family == "voronoi_random" else params.get("iterations", 3)
        if int(iterations) != iterations or iterations < 0:
            raise InvalidParameterError(f"Lloyd iteration count must be >= 0, got {iterations}")
        hole = params.get("hole")
        if hole is not None:
            hole = ((float(hole[0][0]), float(hole[0][1])), float(hole[1]))
            if not hole[1] > 0:
                raise InvalidParameterError("hole radius must be positive")
        mesh = voronoi_mesh(
            _positive_int(params, "n_seeds", minimum=2),
            _box(params),
            iterations=int(iterations),
            seed=seed,
            hole=hole,
            min_vertices=int(params.get("min_vertices", 3)),
            collapse_tol=float(params.get("collapse_tol", 0.0)),
        )
    elif family == "regular_ngon":
        n = params.get("n")
        if n is None or int(n) != n or n < 3:
            raise InvalidParameterError(f"regular_ngon needs integer n >= 3, got {n}")
        mesh = regular_ngon_mesh(
            int(n),
            float(params.get("circumradius", 1.0)),
            tuple(params.get("center", (0.0, 0.0))),
            float(params.get("rotation", 0.0)),
        )
    elif family == "grid_with_inserted_nodes":
        mesh = inserted_nodes_mesh(_positive_int(params, "n_nodes", minimum=4))
    else:
        raise InvalidParameterError(f"unknown mesh family {family!r}; choose from {FAMILIES}")
    validate_mesh(mesh)
    return mesh


def perturb_vertex(mesh, vertex, component, delta):
    """Copy of ``mesh`` with one coordinate of one vertex shifted by ``delta``."""
    axis = {"x": 0, "y": 1, 0: 0, 1: 1}.get(component)
    if axis is None:
        raise InvalidParameterError(f"component must be 'x' or 'y', got {component!r}")
    if not 0 <= vertex < mesh.n_vertices:
        raise IndexError(f"vertex {vertex} out of range")
    vertices = mesh.vertices.copy()
    vertices[vertex, axis] += delta
    for c, ring in enumerate(mesh.cells):
        if vertex not in ring:
            continue
        pts = vertices[list(ring)]
        if not is_simple_polygon(pts) or not signed_area(pts) > 0:
            raise GeometryError(f"perturbation by {delta} makes cell {c} self-intersecting")
    return PolygonalMesh(vertices, mesh.cells, mesh.boundary_edges, dict(mesh.meta))


# ------------------------------------------------------------------- file IO

HEADER = "vemsf-mesh 1"


def write_mesh(mesh, path):
    lines = [HEADER, f"vertices {mesh.n_vertices}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines.append(f"cells {mesh.n_cells}")
    lines += [" ".join(str(i) for i in (len(ring),) + ring) for ring in mesh.cells]
    lines.append(f"boundary {len(mesh.boundary_edges)}")
    lines += [f"{c} {e} {g}" for c, e, g in mesh.boundary_edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path):
    """Parse a mesh file; clockwise rings are reoriented with a warning."""
    raw = Path(path).read_text().splitlines()
    rows = [(i + 1, line.split()) for i, line in enumerate(raw) if line.strip() and not line.lstrip().startswith("#")]
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(rows):
            raise MeshParseError("unexpected end of file", len(raw) + 1)
        item = rows[pos]
        pos += 1
        return item

    lineno, tok = take()
    if " ".join(tok) != HEADER:
        raise MeshParseError(f"expected header {HEADER!r}", lineno)

    def section(name):
        lineno, tok = take()
        if len(tok) != 2 or tok[0] != name or not tok[1].isdigit():
            raise MeshParseError(f"expected '{name} <count>'", lineno)
        return int(tok[1])

    vertices = []
    for _ in range(section("vertices")):
        lineno, tok = take()
        try:
            if len(tok) != 2:
                raise ValueError
            vertices.append((float(tok[0]), float(tok[1])))
        except ValueError:
            raise MeshParseError("vertex line must hold two numbers", lineno) from None
    cells = []
    for _ in range(section("cells")):
        lineno, tok = take()
        try:
            ids = [int(t) for t in tok]
        except ValueError:
            raise MeshParseError("cell line must hold integers", lineno) from None
        if not ids or ids[0] != len(ids) - 1:
            raise MeshParseError("cell vertex count does not match the line", lineno)
        if any(not 0 <= i < len(vertices) for i in ids[1:]):
            raise MeshParseError("cell references an unknown vertex", lineno)
        cells.append(ids[1:])
    boundary = []
    for _ in range(section("boundary")):
        lineno, tok = take()
        try:
            if len(tok) != 3:
                raise ValueError
            boundary.append((int(tok[0]), int(tok[1]), tok[2]))
        except ValueError:
            raise MeshParseError("boundary line must be 'cell local_edge group'", lineno) from None
    if pos != len(rows):
        raise MeshParseError("trailing content after boundary section", rows[pos][0])

    vertices = np.array(vertices, dtype=float).reshape(-1, 2)
    for c, e, g in boundary:
        if not 0 <= c < len(cells) or not 0 <= e < len(cells[c]):
            raise MeshValidationError(f"boundary entry ({c}, {e}, {g}) out of range")
    boundary_pairs = [(c, cells[c][e], cells[c][(e + 1) % len(cells[c])], g) for c, e, g in boundary]
    flipped = []
    for c, ring in enumerate(cells):
        if len(ring) >= 3 and len(set(ring)) == len(ring) and signed_area(vertices[ring]) < 0:
            cells[c] = [ring[0]] + ring[:0:-1]
            flipped.append(c)
    if flipped:
        log.warning("reoriented %d clockwise cell(s) to counterclockwise: %s", len(flipped), flipped[:20])
        fixed = []
        for c, a, b, g in boundary_pairs:
            ring = cells[c]
            n = len(ring)
            edge = next(i for i in range(n) if {ring[i], ring[(i + 1) % n]} == {a, b})
            fixed.append((c, edge, g))
        boundary = fixed
    mesh = PolygonalMesh(vertices, cells, boundary, {"reoriented_cells": flipped})
    validate_mesh(mesh)
    return mesh
