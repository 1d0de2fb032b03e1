"""Global DOF numbering, assembly, boundary conditions, solve and error measures.

Global DOF of (site, component) is ``2 * site + component``.  Sites are the
mesh vertices first, then the k - 1 interior nodes of each edge, edges in
first-visit order and nodes ordered from the lower to the higher vertex id.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import SUFFICIENT_BOUND, element_force, element_stiffness, select_ell
from .errors import ConfigurationError, ElementErrors, InvalidParameterError, SolverError, UnsupportedElementError, VemError
from .mesh import element_geometry
from .projectors import build_projectors, count_boundary_lines
from .quadrature import lobatto_edge_nodes, sbc_polygon_rule


@dataclass(frozen=True)
class DofMap:
    k: int
    site_coords: np.ndarray
    cell_sites: tuple
    edges: tuple
    edge_sites: np.ndarray
    boundary_sites: dict

    @property
    def n_sites(self):
        return len(self.site_coords)

    @property
    def n_dofs(self):
        return 2 * self.n_sites

    def cell_dofs(self, cell):
        s = self.cell_sites[cell]
        return np.concatenate([2 * s, 2 * s + 1])


def build_dof_map(mesh, k):
    for c in range(mesh.n_cells):
        eta = count_boundary_lines(mesh.cell_points(c))
        if k >= eta:
            raise UnsupportedElementError(
                f"cell {c} is covered by {eta} lines; order k={k} would need internal moments", cell=c
            )
    nv = mesh.n_vertices
    edges = mesh.edges()
    edge_id = {e: i for i, e in enumerate(edges)}
    m = k - 1
    t = lobatto_edge_nodes(k)[1:-1]
    edge_sites = nv + np.arange(len(edges) * m, dtype=int).reshape(len(edges), m)
    coords = [mesh.vertices]
    if m:
        ab = np.array(edges, dtype=int).reshape(-1, 2)
        pa = mesh.vertices[ab[:, 0]]
        pb = mesh.vertices[ab[:, 1]]
        coords.append((pa[:, None, :] + t[None, :, None] * (pb - pa)[:, None, :]).reshape(-1, 2))
    site_coords = np.vstack(coords)
    cell_sites = []
    for c, ring in enumerate(mesh.cells):
        interior = []
        n = len(ring)
        for i in range(n):
            a, b = ring[i], ring[(i + 1) % n]
            ids = edge_sites[edge_id[(a, b) if a < b else (b, a)]]
            interior.extend(ids if a < b else ids[::-1])
        cell_sites.append(np.array(list(ring) + interior, dtype=int))
    boundary = {}
    for c, e, g in mesh.boundary_edges:
        ring = mesh.cells[c]
        n = len(ring)
        a, b = ring[e], ring[(e + 1) % n]
        ids = edge_sites[edge_id[(a, b) if a < b else (b, a)]]
        boundary.setdefault(g, set()).update([a, b, *ids.tolist()])
    boundary = {g: np.array(sorted(s), dtype=int) for g, s in boundary.items()}
    site_coords.setflags(write=False)
    return DofMap(k, site_coords, tuple(cell_sites), tuple(edges), edge_sites, boundary)


# ----------------------------------------------------------- problem setup


@dataclass(frozen=True)
class Dirichlet:
    value: Callable
    components: tuple = (0, 1)


@dataclass(frozen=True)
class Neumann:
    # traction(points, outward_normal) -> (n, 2)
    traction: Callable


@dataclass(frozen=True)
class PointConstraint:
    point: tuple
    value: Callable
    components: tuple = (0, 1)


def zero_traction(points, normal):
    return np.zeros((len(points), 2))


@dataclass
class AnalyticField:
    """Closed-form solution of a benchmark problem.

    ``strain`` returns Voigt (eps_11, eps_22, 2 eps_12) and ``stress``
    returns (sigma_11, sigma_22, sigma_12), each of shape (n, 3).
    """

    label: str
    displacement: Callable
    strain: Callable | None = None
    stress: Callable | None = None
    body_force: Callable | None = None
    body_force_degree: int | None = None
    degree: int | None = None

    def traction(self, points, normal):
        s = np.asarray(self.stress(points), dtype=float).reshape(-1, 3)
        n1, n2 = normal
        return np.column_stack([s[:, 0] * n1 + s[:, 2] * n2, s[:, 2] * n1 + s[:, 1] * n2])


@dataclass
class BoundaryValueProblem:
    mesh: object
    k: int
    material: object
    conditions: dict
    body_force: Callable | None = None
    body_force_degree: int | None = None
    point_constraints: tuple = ()
    ell_policy: object = SUFFICIENT_BOUND
    load_degree: int | None = None
    # pure-traction problems: rigid part of u_h set to match this field's mean displacement and rotation
    rigid_reference: Callable | None = None

    def __post_init__(self):
        groups = set(self.mesh.boundary_groups())
        missing = groups - set(self.conditions)
        if missing:
            raise ConfigurationError(f"boundary groups without a condition: {sorted(missing)}")
        unknown = set(self.conditions) - groups
        if unknown:
            raise ConfigurationError(f"conditions given for unknown boundary groups: {sorted(unknown)}")
        for g, cond in self.conditions.items():
            if not isinstance(cond, (Dirichlet, Neumann)):
                raise ConfigurationError(f"condition for {g!r} must be Dirichlet or Neumann")
        if not self.point_constraints and not any(isinstance(c, Dirichlet) for c in self.conditions.values()):
            raise ConfigurationError("no Dirichlet data: the problem is not well posed")


# ---------------------------------------------------------------- assembly


@dataclass
class ElementRecord:
    cell: int
    ell: int
    projectors: object
    K: np.ndarray
    b: np.ndarray


@dataclass
class AssembledSystem:
    K: sp.csr_matrix
    f: np.ndarray
    elements: list = field(default_factory=list)


def _threads():
    try:
        return max(1, int(os.environ.get("VEMSF_THREADS", "1")))
    except ValueError:
        return 1


def _element_job(bvp, dofmap, neumann_edges, c):
    geom = element_geometry(bvp.mesh, c)
    ell = select_ell(geom.n_vertices, bvp.k, bvp.ell_policy)
    proj = build_projectors(geom, bvp.k, ell, cell=c)
    K = element_stiffness(proj, bvp.material)
    tractions = {e: bvp.conditions[g].traction for e, g in neumann_edges.get(c, [])}
    b = element_force(
        proj,
        body_force=bvp.body_force,
        tractions=tractions,
        boundary_edges=[e for e, _ in neumann_edges.get(c, [])],
        body_force_degree=bvp.body_force_degree,
        load_degree=bvp.load_degree,
    )
    return ElementRecord(c, ell, proj, K, b)


def assemble(bvp, dofmap, workers=None):
    """Global stiffness (CSR, symmetric) and load vector; keeps per-element data."""
    neumann_edges = {}
    for c, e, g in bvp.mesh.boundary_edges:
        if isinstance(bvp.conditions.get(g), Neumann):
            neumann_edges.setdefault(c, []).append((e, g))
    workers = workers or _threads()

    def job(c):
        try:
            return _element_job(bvp, dofmap, neumann_edges, c)
        except VemError as exc:
            return (c, exc)

    cells = range(bvp.mesh.n_cells)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, cells))
    else:
        results = [job(c) for c in cells]
    failures = [r for r in results if isinstance(r, tuple)]
    if failures:
        raise ElementErrors(failures)
    n = dofmap.n_dofs
    rows, cols, vals = [], [], []
    f = np.zeros(n)
    for rec in results:
        dofs = dofmap.cell_dofs(rec.cell)
        rows.append(np.repeat(dofs, len(dofs)))
        cols.append(np.tile(dofs, len(dofs)))
        vals.append(rec.K.ravel())
        np.add.at(f, dofs, rec.b)
    K = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    K = 0.5 * (K + K.T)
    return AssembledSystem(K.tocsr(), f, results)


# ------------------------------------------------------- boundary conditions


@dataclass
class ReducedSystem:
    A: sp.csr_matrix
    b: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_dofs: int


def constrained_dofs(bvp, dofmap):
    """Map of constrained global DOF -> prescribed value."""
    values = {}
    for g, cond in bvp.conditions.items():
        if not isinstance(cond, Dirichlet):
            continue
        sites = dofmap.boundary_sites.get(g, np.array([], dtype=int))
        if len(sites) == 0:
            continue
        u0 = np.asarray(cond.value(dofmap.site_coords[sites]), dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(u0)):
            raise ConfigurationError(f"Dirichlet data for {g!r} is not finite at every boundary site")
        for comp in cond.components:
            for s, val in zip(sites, u0[:, comp]):
                values[2 * int(s) + comp] = float(val)
    if bvp.point_constraints:
        scale = float(np.ptp(dofmap.site_coords, axis=0).max()) or 1.0
        for pc in bvp.point_constraints:
            d = np.hypot(*(dofmap.site_coords - np.asarray(pc.point, dtype=float)).T)
            s = int(np.argmin(d))
            if d[s] > 1e-9 * scale:
                raise ConfigurationError(f"point constraint at {pc.point} does not sit on a mesh node")
            u0 = np.asarray(pc.value(dofmap.site_coords[s : s + 1]), dtype=float).reshape(2)
            for comp in pc.components:
                values[2 * s + comp] = float(u0[comp])
    return values


def apply_dirichlet(system, dofmap, bvp):
    """Eliminate constrained DOFs symmetrically (moved to the right-hand side)."""
    values = constrained_dofs(bvp, dofmap)
    n = dofmap.n_dofs
    fixed = np.array(sorted(values), dtype=int)
    fixed_values = np.array([values[i] for i in fixed])
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    K = system.K
    A = K[free][:, free].tocsr()
    b = system.f[free] - K[free][:, fixed] @ fixed_values if len(fixed) else system.f[free].copy()
    return ReducedSystem(A, b, free, fixed, fixed_values, n)


def solve(reduced, rtol=1e-10):
    """Direct sparse solve; raises :class:`SolverError` if the matrix is not SPD."""
    u = np.zeros(reduced.n_dofs)
    u[reduced.fixed] = reduced.fixed_values
    if len(reduced.free) == 0:
        return u
    A = sp.csc_matrix(reduced.A)
    try:
        lu = spla.splu(
            A,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as exc:
        raise SolverError(f"factorization failed: {exc}") from None
    pivots = lu.U.diagonal()
    if np.any(pivots <= 1e-13 * np.abs(pivots).max()):
        raise SolverError("reduced stiffness is not positive definite (spurious modes or missing Dirichlet data)")
    x = lu.solve(reduced.b)
    scale = np.linalg.norm(reduced.b)
    r = reduced.b - A @ x
    res = np.linalg.norm(r)
    # a few steps of iterative refinement recover digits lost to pivot growth
    for _ in range(3):
        if res <= rtol * scale:
            break
        x = x + lu.solve(r)
        r = reduced.b - A @ x
        res = np.linalg.norm(r)
    if not np.isfinite(res) or res > rtol * max(scale, np.finfo(float).tiny):
        if scale > 0 or res > 0:
            raise SolverError(f"solve residual {res:.3e} exceeds {rtol:g} * |b|")
    u[reduced.free] = x
    return u


@dataclass
class Solution:
    u: np.ndarray
    dofmap: DofMap
    system: AssembledSystem

    def nodal(self):
        return self.u.reshape(-1, 2)


def match_rigid_motion(u, dofmap, elements, reference, extra_degree=2):
    """Add the rigid motion that gives u_h the mean displacement and mean rotation of ``reference``.

    Means are taken over the domain with Pi^S u_h; rigid fields are in the
    discrete space, so the shift is exact at every site.
    """
    center = dofmap.site_coords.mean(axis=0)

    def rigid(p):
        q = p - center
        return np.stack(
            [np.column_stack([np.ones(len(p)), np.zeros(len(p))]),
             np.column_stack([np.zeros(len(p)), np.ones(len(p))]),
             np.column_stack([-q[:, 1], q[:, 0]])]
        )

    G = np.zeros((3, 3))
    rhs = np.zeros(3)
    for rec in elements:
        proj = rec.projectors
        rule = sbc_polygon_rule(proj.geometry, proj.k + 1 + extra_degree)
        uh = np.einsum("qca,a->qc", proj.vbasis.eval(rule.points), proj.Pi_S @ u[dofmap.cell_dofs(rec.cell)])
        ue = np.asarray(reference(rule.points), dtype=float).reshape(-1, 2)
        r = rigid(rule.points)
        G += np.einsum("q,iqc,jqc->ij", rule.weights, r, r)
        rhs += np.einsum("q,iqc,qc->i", rule.weights, r, ue - uh)
    a = np.linalg.solve(G, rhs)
    shift = np.einsum("i,iqc->qc", a, rigid(dofmap.site_coords))
    return u + shift.ravel()


def solve_bvp(bvp, workers=None):
    dofmap = build_dof_map(bvp.mesh, bvp.k)
    system = assemble(bvp, dofmap, workers)
    u = solve(apply_dirichlet(system, dofmap, bvp))
    if bvp.rigid_reference is not None:
        u = match_rigid_motion(u, dofmap, system.elements, bvp.rigid_reference)
    return Solution(u, dofmap, system)


# ------------------------------------------------------------------ errors


@dataclass(frozen=True)
class ErrorNorms:
    linf: float
    l2: float
    energy: float


def error_norms(solution, exact, material, extra_degree=None):
    """Nodal max error, L2 error of Pi^S u_h and energy error of the projected strain."""
    dofmap = solution.dofmap
    uh = solution.nodal()
    ue = np.asarray(exact.displacement(dofmap.site_coords), dtype=float).reshape(-1, 2)
    linf = float(np.hypot(*(ue - uh).T).max())
    if extra_degree is None:
        extra_degree = 0 if exact.degree is not None else 2
    C = material.C
    l2_sq = 0.0
    en_sq = 0.0
    for rec in solution.system.elements:
        proj = rec.projectors
        geom = proj.geometry
        k = proj.k
        dofs = dofmap.cell_dofs(rec.cell)
        local = solution.u[dofs]
        # polynomial exact fields of degree d are integrated exactly
        d = exact.degree or 0
        rule = sbc_polygon_rule(geom, max(2 * k + 2, 2 * d) + extra_degree)
        approx = np.einsum("qca,a->qc", proj.vbasis.eval(rule.points), proj.Pi_S @ local)
        diff = np.asarray(exact.displacement(rule.points), dtype=float).reshape(-1, 2) - approx
        l2_sq += float(rule.weights @ (diff**2).sum(axis=1))
        if exact.strain is not None:
            rule = sbc_polygon_rule(geom, max(2 * rec.ell + 2, 2 * d - 2) + extra_degree)
            eps_h = np.einsum("qsa,a->qs", proj.mbasis.eval(rule.points), proj.Pi @ local)
            e = np.asarray(exact.strain(rule.points), dtype=float).reshape(-1, 3) - eps_h
            en_sq += float(rule.weights @ np.einsum("qi,ij,qj->q", e, C, e))
    energy = math.sqrt(max(en_sq, 0.0)) if exact.strain is not None else float("nan")
    return ErrorNorms(linf, math.sqrt(max(l2_sq, 0.0)), energy)


def convergence_rate(errors, dof_counts):
    """Slopes -log(e1/e0) / log(sqrt(N1/N0)); NaN where an error is not positive."""
    errors = [float(e) for e in errors]
    dofs = [float(n) for n in dof_counts]
    if len(errors) != len(dofs) or len(errors) < 2:
        raise InvalidParameterError("need at least two levels with matching error and DOF lists")
    if any(b <= a for a, b in zip(dofs, dofs[1:])):
        raise InvalidParameterError("DOF counts must increase strictly")
    rates = []
    for (e0, e1), (n0, n1) in zip(zip(errors, errors[1:]), zip(dofs, dofs[1:])):
        if e0 > 0 and e1 > 0 and math.isfinite(e0) and math.isfinite(e1):
            rates.append(-math.log(e1 / e0) / math.log(math.sqrt(n1 / n0)))
        else:
            rates.append(float("nan"))
    return rates
