import logging

import numpy as np
import pytest

from vemsf.errors import GeometryError, InvalidParameterError, MeshParseError, MeshValidationError
from vemsf.mesh import (
    PolygonalMesh,
    element_geometry,
    generate_mesh,
    is_simple_polygon,
    perturb_vertex,
    polygon_geometry,
    read_mesh,
    signed_area,
    validate_mesh,
    write_mesh,
)

FAMILY_PARAMS = [
    ("uniform", {"nx": 4, "ny": 3}),
    ("voronoi_random", {"n_seeds": 30}),
    ("voronoi_lloyd", {"n_seeds": 30, "iterations": 4}),
    ("nonconvex_split", {"nx": 3, "ny": 2}),
    ("regular_ngon", {"n": 7}),
    ("grid_with_inserted_nodes", {"n_nodes": 9}),
]


def test_square_geometry(unit_square):
    g = unit_square
    assert g.area == pytest.approx(1.0)
    np.testing.assert_allclose(g.centroid, [0.5, 0.5])
    assert g.diameter == pytest.approx(np.sqrt(2))
    np.testing.assert_allclose(g.normals, [[0, -1], [1, 0], [0, 1], [-1, 0]], atol=1e-15)
    np.testing.assert_allclose(g.edge_lengths, 1.0)


def test_clockwise_polygon_rejected():
    with pytest.raises(GeometryError):
        polygon_geometry([[0, 0], [0, 1], [1, 1], [1, 0]])


def test_simple_polygon_check():
    assert is_simple_polygon(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
    bowtie = np.array([[0, 0], [1, 1], [1, 0], [0, 1]], dtype=float)
    assert not is_simple_polygon(bowtie)


@pytest.mark.parametrize("family, params", FAMILY_PARAMS)
def test_generated_meshes_are_valid(family, params):
    mesh = generate_mesh(family, params, seed=3)
    validate_mesh(mesh)
    for c in range(mesh.n_cells):
        assert signed_area(mesh.cell_points(c)) > 0


@pytest.mark.parametrize("family, params", FAMILY_PARAMS[:4])
def test_box_meshes_tile_the_box(family, params):
    mesh = generate_mesh(family, params, seed=1)
    assert mesh.total_area() == pytest.approx(1.0, rel=1e-12)
    assert set(mesh.boundary_groups()) == {"left", "right", "bottom", "top"}
    for c, e, g in mesh.boundary_edges:
        a, b = element_geometry(mesh, c).edge(e)
        coord = {"left": (0, 0.0), "right": (0, 1.0), "bottom": (1, 0.0), "top": (1, 1.0)}[g]
        assert a[coord[0]] == pytest.approx(coord[1], abs=1e-14)
        assert b[coord[0]] == pytest.approx(coord[1], abs=1e-14)


def test_uniform_counts():
    mesh = generate_mesh("uniform", {"nx": 4, "ny": 4})
    assert mesh.n_cells == 16 and mesh.n_vertices == 25
    assert len(mesh.edges()) == 40


def test_nonconvex_split_cells():
    mesh = generate_mesh("nonconvex_split", {"nx": 4, "ny": 2})
    assert mesh.n_cells == 16
    sizes = sorted(len(c) for c in mesh.cells)
    assert sizes == [4] * 8 + [6] * 8
    hexes = [c for c in range(mesh.n_cells) if len(mesh.cells[c]) == 6]
    # the hexagonal half is not convex
    pts = mesh.cell_points(hexes[0])
    d0 = np.roll(pts, -1, axis=0) - pts
    d1 = np.roll(d0, -1, axis=0)
    assert np.any(d0[:, 0] * d1[:, 1] - d0[:, 1] * d1[:, 0] < 0)


def test_voronoi_is_deterministic():
    a = generate_mesh("voronoi_lloyd", {"n_seeds": 40}, seed=11)
    b = generate_mesh("voronoi_lloyd", {"n_seeds": 40}, seed=11)
    c = generate_mesh("voronoi_lloyd", {"n_seeds": 40}, seed=12)
    assert a == b and hash(a) == hash(b)
    assert a != c


def test_voronoi_min_vertices():
    mesh = generate_mesh("voronoi_random", {"n_seeds": 16, "min_vertices": 4}, seed=0)
    assert min(len(c) for c in mesh.cells) >= 4


def test_voronoi_with_hole():
    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 120, "box": (0, 5, 0, 5), "hole": ((0, 0), 1.0)}, seed=0)
    groups = mesh.boundary_groups()
    assert set(groups) == {"left", "right", "bottom", "top", "hole"}
    for c, e in groups["hole"]:
        a, b = element_geometry(mesh, c).edge(e)
        assert np.hypot(*a) == pytest.approx(1.0, abs=1e-12)
        assert np.hypot(*b) == pytest.approx(1.0, abs=1e-12)
    # chords cut slightly into the disc, so the area exceeds the exact quarter-plate value
    assert 25 - np.pi / 4 < mesh.total_area() < 25 - np.pi / 4 + 0.05


def test_regular_ngon():
    mesh = generate_mesh("regular_ngon", {"n": 6})
    g = element_geometry(mesh, 0)
    assert g.area == pytest.approx(1.5 * np.sqrt(3))
    assert g.diameter == pytest.approx(2.0)


@pytest.mark.parametrize("n_nodes", [4, 7, 12])
def test_inserted_nodes_center_cell(n_nodes):
    mesh = generate_mesh("grid_with_inserted_nodes", {"n_nodes": n_nodes})
    assert mesh.n_cells == 9
    assert len(mesh.cells[4]) == n_nodes
    assert mesh.total_area() == pytest.approx(1.0)


@pytest.mark.parametrize(
    "family, params",
    [
        ("uniform", {"nx": 0, "ny": 2}),
        ("voronoi_lloyd", {"n_seeds": 10, "iterations": -1}),
        ("regular_ngon", {"n": 2}),
        ("nope", {}),
        ("uniform", {"nx": 2, "ny": 2, "box": (1, 0, 0, 1)}),
    ],
)
def test_bad_parameters(family, params):
    with pytest.raises(InvalidParameterError):
        generate_mesh(family, params)


def test_validation_catches_hanging_node():
    v = [[0, 0], [1, 0], [2, 0], [2, 1], [1, 1], [0, 1], [1, 0.5]]
    cells = [(0, 1, 4, 5), (1, 2, 3, 4, 6)]
    # left square misses vertex 6 that the right cell uses
    mesh = PolygonalMesh(v, [(0, 1, 6, 4, 5), (1, 2, 3, 4, 6)])
    validate_mesh(mesh)
    with pytest.raises(MeshValidationError):
        validate_mesh(PolygonalMesh(v, cells))


def test_validation_catches_orientation_and_duplicates():
    v = [[0, 0], [1, 0], [1, 1], [0, 1]]
    with pytest.raises(MeshValidationError):
        validate_mesh(PolygonalMesh(v, [(0, 3, 2, 1)]))
    with pytest.raises(MeshValidationError):
        validate_mesh(PolygonalMesh(v, [(0, 1, 1, 2)]))


def test_perturb_vertex():
    mesh = generate_mesh("regular_ngon", {"n": 8})
    moved = perturb_vertex(mesh, 0, "y", 0.05)
    assert moved.vertices[0, 1] == pytest.approx(0.05)
    assert mesh.vertices[0, 1] == 0.0
    with pytest.raises(GeometryError):
        perturb_vertex(mesh, 0, "x", -2.5)


def test_mesh_file_round_trip(tmp_path):
    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 25}, seed=5)
    path = tmp_path / "m.txt"
    write_mesh(mesh, path)
    assert read_mesh(path) == mesh


def test_clockwise_file_is_reoriented(tmp_path, caplog):
    path = tmp_path / "cw.txt"
    path.write_text(
        "vemsf-mesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ncells 1\n4 0 3 2 1\nboundary 4\n"
        "0 0 left\n0 1 top\n0 2 right\n0 3 bottom\n"
    )
    with caplog.at_level(logging.WARNING):
        mesh = read_mesh(path)
    assert "reoriented" in caplog.text
    assert signed_area(mesh.cell_points(0)) > 0
    assert mesh.meta["reoriented_cells"] == [0]
    validate_mesh(mesh)
    g = element_geometry(mesh, 0)
    for c, e, name in mesh.boundary_edges:
        a, b = g.edge(e)
        if name == "left":
            assert a[0] == b[0] == 0.0
        if name == "top":
            assert a[1] == b[1] == 1.0


@pytest.mark.parametrize(
    "text, line",
    [
        ("bad header\n", 1),
        ("vemsf-mesh 1\nvertices 1\n0 x\n", 3),
        ("vemsf-mesh 1\nvertices 1\n0 0\ncells 1\n3 0 0\n", 5),
        ("vemsf-mesh 1\nvertices 1\n0 0\ncells 0\nboundary 1\n0 0\n", 6),
    ],
)
def test_parse_errors_report_line(tmp_path, text, line):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(MeshParseError) as info:
        read_mesh(path)
    assert info.value.line == line


def test_short_edge_collapse():
    params = {"n_seeds": 400, "iterations": 5}
    raw = generate_mesh("voronoi_lloyd", params, seed=0)
    mesh = generate_mesh("voronoi_lloyd", {**params, "collapse_tol": 0.1}, seed=0)
    validate_mesh(mesh)
    assert mesh.total_area() == pytest.approx(1.0, rel=1e-12)
    assert set(mesh.boundary_groups()) == {"left", "right", "bottom", "top"}
    shortest = min(element_geometry(mesh, c).edge_lengths.min() for c in range(mesh.n_cells))
    assert shortest >= 0.1 / np.sqrt(400) * (1 - 1e-12)
    assert mesh.n_vertices < raw.n_vertices and mesh.n_cells == raw.n_cells
