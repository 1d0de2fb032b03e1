import numpy as np
import pytest
import scipy.sparse as sp

from vemsf.element import element_matrices
from vemsf.errors import ConfigurationError, ElementErrors, InvalidParameterError, SolverError
from vemsf.mesh import PolygonalMesh, element_geometry, generate_mesh
from vemsf.polyspace import material_matrix
from vemsf.system import (
    AnalyticField,
    BoundaryValueProblem,
    Dirichlet,
    Neumann,
    ReducedSystem,
    Solution,
    apply_dirichlet,
    assemble,
    build_dof_map,
    convergence_rate,
    error_norms,
    solve,
    solve_bvp,
)

MAT = material_matrix(1.0, 0.3)


def _linear(p):
    return np.column_stack([1 + 2 * p[:, 0] - p[:, 1], 3 - p[:, 0] + 0.5 * p[:, 1]])


def _all_dirichlet(mesh, field, **kw):
    return BoundaryValueProblem(mesh, kw.pop("k", 2), MAT, {g: Dirichlet(field) for g in mesh.boundary_groups()}, **kw)


def test_dof_count_uniform_k2():
    dm = build_dof_map(generate_mesh("uniform", {"nx": 4, "ny": 4}), 2)
    assert dm.n_sites == 65 and dm.n_dofs == 130


def test_single_square_k1():
    mesh = generate_mesh("uniform", {"nx": 1, "ny": 1})
    assert build_dof_map(mesh, 1).n_dofs == 8


@pytest.mark.parametrize("k", [2, 3])
def test_shared_edge_sites_are_conforming(k):
    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 20, "min_vertices": 4}, seed=2)
    dm = build_dof_map(mesh, k)
    assert dm.n_sites == mesh.n_vertices + (k - 1) * len(mesh.edges())
    for c in range(mesh.n_cells):
        g = element_geometry(mesh, c)
        from vemsf.projectors import build_dof_layout

        local = build_dof_layout(g, k).sites
        np.testing.assert_allclose(dm.site_coords[dm.cell_sites[c]], local, atol=1e-14)


def test_two_squares_share_midpoint():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 1})
    dm = build_dof_map(mesh, 2)
    assert dm.n_sites == 6 + 7
    shared = set(dm.cell_sites[0][4:].tolist()) & set(dm.cell_sites[1][4:].tolist())
    assert len(shared) == 1


def test_single_element_global_equals_local():
    mesh = generate_mesh("regular_ngon", {"n": 6})
    bvp = BoundaryValueProblem(mesh, 2, MAT, {"boundary": Dirichlet(_linear)})
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    K_loc = element_matrices(element_geometry(mesh, 0), 2, MAT).K
    perm = dm.cell_dofs(0)
    np.testing.assert_allclose(sysm.K.toarray()[np.ix_(perm, perm)], K_loc, atol=1e-13)


def test_energy_is_additive():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 1})
    bvp = _all_dirichlet(mesh, _linear)
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    field = lambda p: np.column_stack([p[:, 0] ** 2, p[:, 0] * p[:, 1]])
    u = field(dm.site_coords).ravel()
    total = u @ sysm.K @ u
    parts = sum(rec.K @ u[dm.cell_dofs(rec.cell)] @ u[dm.cell_dofs(rec.cell)] for rec in sysm.elements)
    assert total == pytest.approx(parts, rel=1e-13)


def test_assembly_symmetry_and_rigid_kernel():
    mesh = generate_mesh("voronoi_random", {"n_seeds": 25}, seed=4)
    bvp = _all_dirichlet(mesh, _linear)
    K = assemble(bvp, build_dof_map(mesh, 2)).K
    assert abs(K - K.T).max() <= 1e-12 * abs(K).max()
    lam = np.linalg.eigvalsh(K.toarray())
    assert np.count_nonzero(lam < 1e-8 * lam[-1]) == 3


def test_threaded_assembly_matches(monkeypatch):
    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 30}, seed=1)
    bvp = _all_dirichlet(mesh, _linear)
    dm = build_dof_map(mesh, 2)
    serial = assemble(bvp, dm, workers=1)
    monkeypatch.setenv("VEMSF_THREADS", "3")
    threaded = assemble(bvp, dm)
    assert abs(serial.K - threaded.K).max() == 0.0
    np.testing.assert_array_equal(serial.f, threaded.f)


def test_element_errors_are_aggregated():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 2})

    def bad_force(p):
        raise InvalidParameterError("no load here")

    bvp = _all_dirichlet(mesh, _linear, body_force=bad_force)
    with pytest.raises(ElementErrors) as info:
        assemble(bvp, build_dof_map(mesh, 2))
    assert sorted(c for c, _ in info.value.failures) == [0, 1, 2, 3]


def test_problem_validation():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 2})
    with pytest.raises(ConfigurationError):
        BoundaryValueProblem(mesh, 2, MAT, {"left": Dirichlet(_linear)})
    traction = {g: Neumann(lambda p, n: np.zeros((len(p), 2))) for g in mesh.boundary_groups()}
    with pytest.raises(ConfigurationError):
        BoundaryValueProblem(mesh, 2, MAT, traction)


def test_zero_dirichlet_keeps_rhs():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 2})
    f = lambda p: np.tile([1.0, 2.0], (len(p), 1))
    bvp = _all_dirichlet(mesh, lambda p: np.zeros((len(p), 2)), body_force=f, body_force_degree=0)
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    red = apply_dirichlet(sysm, dm, bvp)
    np.testing.assert_array_equal(red.b, sysm.f[red.free])


def test_linear_patch_k1():
    mesh = generate_mesh("uniform", {"nx": 3, "ny": 3})
    sol = solve_bvp(_all_dirichlet(mesh, _linear, k=1))
    np.testing.assert_allclose(sol.nodal(), _linear(sol.dofmap.site_coords), atol=1e-11)


def test_fully_constrained_system():
    mesh = generate_mesh("uniform", {"nx": 1, "ny": 1})
    sol = solve_bvp(_all_dirichlet(mesh, _linear, k=1))
    np.testing.assert_allclose(sol.nodal(), _linear(sol.dofmap.site_coords), atol=1e-15)


def test_solve_identity():
    A = sp.identity(5, format="csr")
    b = np.arange(1.0, 6.0)
    red = ReducedSystem(A, b, np.arange(5), np.array([], dtype=int), np.array([]), 5)
    np.testing.assert_allclose(solve(red), b)


def test_solve_random_spd_against_dense():
    rng = np.random.default_rng(8)
    M = rng.normal(size=(50, 50))
    A = M @ M.T + 50 * np.eye(50)
    b = rng.normal(size=50)
    red = ReducedSystem(sp.csr_matrix(A), b, np.arange(50), np.array([], dtype=int), np.array([]), 50)
    assert np.abs(solve(red) - np.linalg.solve(A, b)).max() < 1e-10


def test_singular_system_raises():
    mesh = generate_mesh("uniform", {"nx": 2, "ny": 2})
    bvp = _all_dirichlet(mesh, _linear)
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    red = ReducedSystem(sysm.K, sysm.f, np.arange(dm.n_dofs), np.array([], dtype=int), np.array([]), dm.n_dofs)
    with pytest.raises(SolverError):
        solve(red)


def test_errors_of_interpolated_polynomial():
    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 20, "min_vertices": 4}, seed=6)
    u = lambda p: np.column_stack([p[:, 0] ** 3 - p[:, 1], p[:, 0] * p[:, 1] ** 2])
    eps = lambda p: np.column_stack([3 * p[:, 0] ** 2, 2 * p[:, 0] * p[:, 1], -1 + p[:, 1] ** 2])
    ex = AnalyticField("cubic", u, eps, degree=3)
    bvp = _all_dirichlet(mesh, u, k=3)
    dm = build_dof_map(mesh, 3)
    sysm = assemble(bvp, dm)
    e = error_norms(Solution(u(dm.site_coords).ravel(), dm, sysm), ex, MAT)
    assert max(e.linf, e.l2, e.energy) < 1e-10


def test_constant_field_l2_norm():
    mesh = generate_mesh("voronoi_random", {"n_seeds": 12}, seed=0)
    bvp = _all_dirichlet(mesh, _linear)
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    ex = AnalyticField("one", lambda p: np.tile([1.0, 0.0], (len(p), 1)), degree=0)
    e = error_norms(Solution(np.zeros(dm.n_dofs), dm, sysm), ex, MAT)
    assert e.l2 == pytest.approx(1.0, rel=1e-13)
    assert e.linf == 1.0
    assert np.isnan(e.energy)


def _oversampled_l2(sol, exact_u, n=24):
    """L2 error via a centroid fan of each cell and a collapsed Gauss rule (independent of SBC)."""
    g, w = np.polynomial.legendre.leggauss(n)
    g = 0.5 * (g + 1)
    w = 0.5 * w
    s, t = np.meshgrid(g, g, indexing="ij")
    ws = np.outer(w, w)
    total = 0.0
    for rec in sol.system.elements:
        P = rec.projectors
        v = P.geometry.vertices
        c = P.geometry.centroid
        coef = P.Pi_S @ sol.u[sol.dofmap.cell_dofs(rec.cell)]
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            # x = c + s (a - c) + s t (b - a), Jacobian s * 2|T|
            pts = c + s[..., None] * (a - c) + (s * t)[..., None] * (b - a)
            jac = abs((a - c)[0] * (b - a)[1] - (a - c)[1] * (b - a)[0]) * s
            pts = pts.reshape(-1, 2)
            uh = np.einsum("qca,a->qc", P.vbasis.eval(pts), coef)
            d = exact_u(pts) - uh
            total += float(((ws * jac).ravel() * (d**2).sum(axis=1)).sum())
    return np.sqrt(total)


def test_l2_error_matches_oversampled_oracle():
    from vemsf.studybench.catalog import manufactured1

    bench = manufactured1()
    mesh = bench.mesh("voronoi_lloyd", seed=0, n_seeds=64, iterations=5)
    sol = solve_bvp(bench.bvp(mesh, 2))
    e = error_norms(sol, bench.exact, bench.material)
    assert e.l2 == pytest.approx(_oversampled_l2(sol, bench.exact.displacement), rel=1e-8)


def test_convergence_rate_examples():
    assert convergence_rate([1.0, 0.5], [100, 400]) == [pytest.approx(1.0)]
    n = np.array([10.0, 80.0, 640.0])
    assert convergence_rate(list(2 * n**-1.5), n) == [pytest.approx(3.0), pytest.approx(3.0)]
    rates = convergence_rate([1.0, 0.0, 0.1], [1, 2, 3])
    assert np.isnan(rates[0]) and np.isnan(rates[1])
    with pytest.raises(InvalidParameterError):
        convergence_rate([1.0], [10])
    with pytest.raises(InvalidParameterError):
        convergence_rate([1.0, 0.5], [10, 10])


def test_neumann_patch_on_mixed_boundary():
    mesh = generate_mesh("nonconvex_split", {"nx": 3, "ny": 3})
    u = lambda p: np.column_stack([p[:, 0] * p[:, 1], p[:, 0] ** 2])
    eps = lambda p: np.column_stack([p[:, 1], np.zeros(len(p)), 3 * p[:, 0]])
    stress = lambda p: eps(p) @ MAT.C.T
    # f = -div(sigma) for this field
    C = MAT.C
    f_const = -np.array([C[0, 0] * 0 + C[2, 2] * 0, C[2, 2] * 3 + C[1, 0] * 1])
    ex = AnalyticField("q", u, eps, stress, lambda p: np.tile(f_const, (len(p), 1)), 0, 2)
    conds = {"left": Dirichlet(u), "bottom": Dirichlet(u), "right": Neumann(ex.traction), "top": Neumann(ex.traction)}
    sol = solve_bvp(BoundaryValueProblem(mesh, 2, MAT, conds, ex.body_force, 0))
    e = error_norms(sol, ex, MAT)
    assert max(e.linf, e.l2, e.energy) < 1e-11


def test_mesh_without_boundary_groups_needs_constraints():
    mesh = PolygonalMesh([[0, 0], [1, 0], [1, 1], [0, 1]], [(0, 1, 2, 3)])
    with pytest.raises(ConfigurationError):
        BoundaryValueProblem(mesh, 1, MAT, {})


def test_match_rigid_motion_restores_field():
    from vemsf.system import match_rigid_motion

    mesh = generate_mesh("voronoi_lloyd", {"n_seeds": 20}, seed=3)
    field = lambda p: np.column_stack([p[:, 0] ** 2 - p[:, 1], p[:, 0] * p[:, 1]])
    bvp = _all_dirichlet(mesh, field)
    dm = build_dof_map(mesh, 2)
    sysm = assemble(bvp, dm)
    x = dm.site_coords
    rigid = np.column_stack([0.3 - 0.2 * x[:, 1], -1.1 + 0.2 * x[:, 0]])
    shifted = (field(x) + rigid).ravel()
    fixed = match_rigid_motion(shifted, dm, sysm.elements, field)
    np.testing.assert_allclose(fixed.reshape(-1, 2), field(x), atol=1e-12)


def test_error_norm_quadrature_refinement():
    from vemsf.studybench.catalog import manufactured2

    bench = manufactured2()
    mesh = bench.mesh("voronoi_lloyd", seed=1, n_seeds=40, collapse_tol=0.1)
    sol = solve_bvp(bench.bvp(mesh, 2))
    base = error_norms(sol, bench.exact, bench.material)
    fine = error_norms(sol, bench.exact, bench.material, extra_degree=10)
    # quadrature noise must be negligible next to the factor >= 4 change between levels
    assert base.l2 == pytest.approx(fine.l2, rel=1e-4)
    assert base.energy == pytest.approx(fine.energy, rel=1e-4)
