"""Per-element projection matrices of the serendipity virtual element space.

DOF ordering on an element with S scalar sites: entries ``0..S-1`` are the
first displacement component at each site, ``S..2S-1`` the second.  Sites
are the vertices in ring order followed by the k-1 interior Gauss-Lobatto
nodes of each edge, edge by edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConditioningError, InvalidParameterError, RankDeficiencyError, UnsupportedElementError
from .mesh import ElementGeometry
from .polyspace import MatrixMonomialBasis, VectorMonomialBasis
from .quadrature import edge_rule, lobatto_edge_nodes, sbc_polygon_rule

CONDITION_LIMIT = 1e14
LINE_TOL = 1e-10


def count_boundary_lines(vertices, tol=LINE_TOL):
    """Minimum number of distinct straight lines covering the polygon boundary."""
    v = np.asarray(vertices, dtype=float)
    center = v.mean(axis=0)
    scale = np.abs(v - center).max() or 1.0
    p = (v - center) / scale
    q = np.roll(p, -1, axis=0)
    d = q - p
    normal = np.column_stack([-d[:, 1], d[:, 0]])
    normal /= np.hypot(normal[:, 0], normal[:, 1])[:, None]
    offset = (normal * p).sum(axis=1)
    lines = []
    for (a, b), c in zip(normal, offset):
        if a < -tol or (abs(a) <= tol and b < 0):
            a, b, c = -a, -b, -c
        if not any(abs(a - la) <= tol and abs(b - lb) <= tol and abs(c - lc) <= tol for la, lb, lc in lines):
            lines.append((a, b, c))
    return len(lines)


def lagrange_basis(nodes, t):
    """Values of the Lagrange polynomials on ``nodes`` at ``t``: shape (len(t), len(nodes))."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.ones((len(t), len(nodes)))
    for i, ti in enumerate(nodes):
        for j, tj in enumerate(nodes):
            if i != j:
                out[:, i] *= (t - tj) / (ti - tj)
    return out


def condition_number(a):
    return float(np.linalg.cond(a, 1))


def _checked_solve(a, b, name, limit=CONDITION_LIMIT):
    cond = condition_number(a)
    if not cond <= limit:
        raise ConditioningError(f"{name} is ill-conditioned (1-norm condition {cond:.3g} > {limit:.0e})")
    # symmetric diagonal scaling removes the spread in monomial magnitudes
    d = 1.0 / np.sqrt(np.abs(np.diag(a)))
    x = scipy.linalg.solve(a * d[:, None] * d[None, :], b * d[:, None], assume_a="pos")
    return x * d[:, None], cond


@dataclass(frozen=True)
class DofLayout:
    geometry: ElementGeometry
    k: int
    sites: np.ndarray
    edge_sites: np.ndarray
    params: np.ndarray
    eta: int

    @property
    def n_sites(self):
        return len(self.sites)

    @property
    def n_dofs(self):
        return 2 * len(self.sites)

    def dof_nodes(self):
        """(2S, 2) positions and (2S,) component index of every DOF."""
        return np.vstack([self.sites, self.sites]), np.repeat([0, 1], self.n_sites)

    def interpolate(self, field):
        """DOF vector of a vector field given as ``field(points) -> (n, 2)``."""
        vals = np.asarray(field(self.sites), dtype=float).reshape(-1, 2)
        return np.concatenate([vals[:, 0], vals[:, 1]])


def build_dof_layout(geom, k, cell=None):
    if k not in (1, 2, 3):
        raise InvalidParameterError(f"order k must be 1, 2 or 3, got {k}")
    eta = count_boundary_lines(geom.vertices)
    if k >= eta:
        where = f"cell {cell}" if cell is not None else "element"
        raise UnsupportedElementError(
            f"{where} is covered by {eta} lines; order k={k} would need internal moments (k >= eta_E)",
            cell=cell,
        )
    n = geom.n_vertices
    params = lobatto_edge_nodes(k)
    interior = params[1:-1]
    verts = geom.vertices
    ends = np.roll(verts, -1, axis=0)
    extra = (verts[:, None, :] + interior[None, :, None] * (ends - verts)[:, None, :]).reshape(-1, 2)
    sites = np.vstack([verts, extra])
    edge_sites = np.empty((n, k + 1), dtype=int)
    for i in range(n):
        edge_sites[i, 0] = i
        edge_sites[i, 1:k] = n + i * (k - 1) + np.arange(k - 1)
        edge_sites[i, k] = (i + 1) % n
    return DofLayout(geometry=geom, k=k, sites=sites, edge_sites=edge_sites, params=params, eta=eta)


def vector_basis_for(geom, k):
    return VectorMonomialBasis(k, tuple(geom.centroid), geom.diameter)


def matrix_basis_for(geom, ell):
    return MatrixMonomialBasis(ell, tuple(geom.centroid), geom.diameter)


def dof_matrix_D(layout, basis, rank_tol=1e-12):
    """D[j, alpha] = j-th DOF of the alpha-th basis field; must have full column rank."""
    vals = basis.eval(layout.sites)
    D = np.vstack([vals[:, 0, :], vals[:, 1, :]])
    if D.shape[0] < D.shape[1]:
        raise RankDeficiencyError(f"{D.shape[0]} DOFs cannot determine {D.shape[1]} polynomial coefficients")
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[-1] <= rank_tol * sv[0]:
        raise RankDeficiencyError(
            f"DOF matrix has numerical rank below {D.shape[1]} (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})"
        )
    return D


def serendipity_projector(layout, basis, D=None):
    """Return (Pi_S, G_hat, B_hat, cond(G_hat)).

    Because the canonical basis satisfies delta_j(phi_i) = delta_ij, the
    right-hand side matrix is simply D^T.
    """
    if D is None:
        D = dof_matrix_D(layout, basis)
    G_hat = D.T @ D
    B_hat = D.T.copy()
    Pi_S, cond = _checked_solve(G_hat, B_hat, "serendipity Gram matrix")
    return Pi_S, G_hat, B_hat, cond


def l2_displacement_projector(layout, basis, Pi_S, rule=None):
    """Return (Pi0_tilde, G_tilde, B_tilde, cond(G_tilde)); quadrature exact to degree 2k."""
    if rule is None:
        rule = sbc_polygon_rule(layout.geometry, 2 * basis.k)
    N = basis.eval(rule.points)
    G_t = np.einsum("q,qca,qcb->ab", rule.weights, N, N)
    G_t = 0.5 * (G_t + G_t.T)
    # the interior function is replaced by its serendipity polynomial
    B_t = G_t @ Pi_S
    Pi0, cond = _checked_solve(G_t, B_t, "displacement Gram matrix")
    return Pi0, G_t, B_t, cond


def scalar_gram(mbasis, geom, rule=None):
    if rule is None:
        rule = sbc_polygon_rule(geom, 2 * mbasis.ell)
    m = mbasis.scalar(rule.points)
    g = np.einsum("q,qa,qb->ab", rule.weights, m, m)
    return 0.5 * (g + g.T)


def strain_boundary_matrix(layout, mbasis):
    """Sum over edges of the integral of (N_dE N^p)^T N^v; exact to degree ell + k."""
    geom = layout.geometry
    k = layout.k
    S = layout.n_sites
    nl = mbasis.n_scalar
    B = np.zeros((mbasis.size, 2 * S))
    rows = [np.arange(s, mbasis.size, 3) for s in range(3)]
    for i in range(geom.n_vertices):
        p0, p1 = geom.edge(i)
        rule = edge_rule(p0, p1, mbasis.ell + k)
        L = lagrange_basis(layout.params, rule.params)
        m = mbasis.scalar(rule.points)
        local = np.einsum("q,qa,qi->ai", rule.weights, m, L)
        n1, n2 = geom.normals[i]
        first = layout.edge_sites[i]
        second = first + S
        B[np.ix_(rows[0], first)] += n1 * local
        B[np.ix_(rows[1], second)] += n2 * local
        B[np.ix_(rows[2], first)] += n2 * local
        B[np.ix_(rows[2], second)] += n1 * local
    assert B.shape == (3 * nl, 2 * S)
    return B


def strain_volume_matrix(vbasis, mbasis, geom, rule=None):
    """Integral of (div N^p)^T N~^p over the element: (3 n_ell, N_k); degree ell - 1 + k."""
    if mbasis.ell == 0:
        return np.zeros((mbasis.size, vbasis.size))
    if rule is None:
        rule = sbc_polygon_rule(geom, mbasis.ell - 1 + vbasis.k)
    div = mbasis.divergence(rule.points)
    N = vbasis.eval(rule.points)
    return np.einsum("q,qcm,qcn->mn", rule.weights, div, N)


def l2_strain_projector(layout, vbasis, mbasis, Pi_S, scalar_g=None):
    """Return (Pi, G, B, cond(G)) for the L2 projection of the Voigt strain."""
    geom = layout.geometry
    if scalar_g is None:
        scalar_g = scalar_gram(mbasis, geom)
    G = np.kron(scalar_g, np.eye(3))
    B = strain_boundary_matrix(layout, mbasis) - strain_volume_matrix(vbasis, mbasis, geom) @ Pi_S
    Pi, cond = _checked_solve(G, B, "strain Gram matrix")
    return Pi, G, B, cond


@dataclass
class ProjectorSet:
    layout: DofLayout
    vbasis: VectorMonomialBasis
    mbasis: MatrixMonomialBasis
    D: np.ndarray
    Pi_S: np.ndarray
    Pi0_tilde: np.ndarray
    Pi: np.ndarray
    strain_gram: np.ndarray
    ell: int
    conditioning: dict = field(default_factory=dict)

    @property
    def k(self):
        return self.layout.k

    @property
    def geometry(self):
        return self.layout.geometry


def build_projectors(geom, k, ell, cell=None):
    layout = build_dof_layout(geom, k, cell=cell)
    vbasis = vector_basis_for(geom, k)
    mbasis = matrix_basis_for(geom, ell)
    D = dof_matrix_D(layout, vbasis)
    Pi_S, _, _, c_hat = serendipity_projector(layout, vbasis, D)
    Pi0, _, _, c_tilde = l2_displacement_projector(layout, vbasis, Pi_S)
    sg = scalar_gram(mbasis, geom)
    Pi, _, _, c_strain = l2_strain_projector(layout, vbasis, mbasis, Pi_S, sg)
    return ProjectorSet(
        layout=layout,
        vbasis=vbasis,
        mbasis=mbasis,
        D=D,
        Pi_S=Pi_S,
        Pi0_tilde=Pi0,
        Pi=Pi,
        strain_gram=sg,
        ell=ell,
        conditioning={"G_hat": c_hat, "G_tilde": c_tilde, "G": c_strain},
    )
